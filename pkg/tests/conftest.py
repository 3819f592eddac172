import re

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(n, "PASS")
        _ACCEPTANCE[n] = "PASS" if (prev == "PASS" and report.outcome == "passed") else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n}: {_ACCEPTANCE[n]}")

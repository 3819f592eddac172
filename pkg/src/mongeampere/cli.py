"""Command-line front end: ``classify``, ``check`` and ``determining`` jobs.

Exit codes: 0 success, 1 usage or I/O failure, 2 malformed job (JSON, schema
or expression syntax), 3 non-constant rank, 4 input not parabolic, 5 any
other analysis failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .classify import (
    ContactChart,
    classify,
    complete_integral_check,
    contact_chart_check,
    generalized_integral_check,
    intermediate_integral_check,
    invert_chart,
    pushforward,
)
from .contact import VectorField
from .distrib import Distribution
from .equation import (
    MAEquation,
    characteristic_distribution,
    determining_pde,
    determining_residual,
    equation_from_distribution,
)
from .errors import ChartError, ExprSyntaxError, MongeAmpereError, NonConstantRankError, NotParabolicError
from .symexpr import COORDS, Const, SamplePlan, is_zero, parse, to_string

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_RANK = 3
EXIT_NOT_PARABOLIC = 4
EXIT_ANALYSIS = 5

_PLAN_KEYS = ("base", "half_width", "samples", "seed", "eps_zero", "eps_rank", "exact")


class JobError(Exception):
    """A job file that cannot be turned into an analysis request."""


def load_schema() -> dict:
    text = resources.files("mongeampere").joinpath("schemas/job.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _number(v) -> Fraction:
    if isinstance(v, bool):
        raise JobError("booleans are not numbers")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    e = parse(str(v))
    if not isinstance(e, Const):
        raise JobError(f"{v!r} is not a number")
    return e.value


def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass
class Job:
    equation: MAEquation
    params: tuple
    plan: SamplePlan
    candidates: list
    warnings: list = field(default_factory=list)

    def echo(self) -> dict:
        return {
            "equation": self.equation.echo(),
            "display": self.equation.display,
            "parameters": {k: _frac_str(v) for k, v in self.plan.bindings},
            "candidates": [_echo_candidate(c, self.params) for c in self.candidates],
        }


def _echo_candidate(c: dict, params: tuple) -> dict:
    def canon(v):
        if isinstance(v, str):
            return to_string(parse(v, params))
        if isinstance(v, list):
            return [canon(x) for x in v]
        if isinstance(v, dict):
            return {k: canon(x) for k, x in v.items()}
        return v

    return {"kind": c["kind"], "payload": canon(c["payload"])}


def plan_to_dict(plan: SamplePlan) -> dict:
    return {
        "base": [_frac_str(c) for c in plan.base],
        "half_width": [_frac_str(c) for c in plan.half_width],
        "samples": plan.samples,
        "seed": plan.seed,
        "eps_zero": plan.eps_zero,
        "eps_rank": plan.eps_rank,
        "exact": plan.exact,
    }


def build_job(doc, overrides: dict | None = None) -> Job:
    """Validate a parsed JSON job and resolve it against plan defaults and CLI overrides."""
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise JobError(f"schema violation at {where}: {exc.message}") from None
    warnings = []
    params = doc.get("parameters", {})
    bindings = {k: _number(v) for k, v in params.items()}
    names = tuple(sorted(bindings))
    (kind, values), = doc["equation"].items()
    try:
        E = MAEquation.build(kind, values, names)
    except ValueError as exc:
        raise JobError(str(exc)) from None
    raw = doc.get("plan")
    if raw is None:
        warnings.append("plan defaults applied")
        raw = {}
    else:
        missing = [k for k in _PLAN_KEYS if k not in raw]
        if missing:
            warnings.append("plan defaults applied for: " + ", ".join(missing))
    kw = {}
    if "base" in raw:
        kw["base"] = tuple(_number(v) for v in raw["base"])
    if "half_width" in raw:
        hw = raw["half_width"]
        kw["half_width"] = tuple(_number(v) for v in hw) if isinstance(hw, list) else (_number(hw),) * 5
    for k in ("samples", "seed", "eps_zero", "eps_rank", "exact"):
        if k in raw:
            kw[k] = raw[k]
    for k, v in (overrides or {}).items():
        if v is not None:
            kw[k] = v
    try:
        plan = SamplePlan(bindings=bindings, **kw)
    except ValueError as exc:
        raise JobError(f"invalid plan: {exc}") from None
    return Job(E, names, plan, list(doc.get("candidates", [])), warnings)


# ------------------------------------------------------------ candidates


def _field(d: dict, params: tuple) -> VectorField:
    return VectorField(*(parse(d.get(c, "0"), params) for c in COORDS))


def run_candidate(job: Job, cand: dict) -> dict:
    kind, payload = cand["kind"], cand["payload"]
    E, plan, params = job.equation, job.plan, job.params
    if kind == "intermediate":
        f = parse(payload["f"], params)
        v = intermediate_integral_check(E, f, plan)
        res = determining_residual(E, f, plan)
        verdict = {
            "kind": kind,
            "f": to_string(f),
            "pass": v.ok,
            "membership": v.details["membership"],
            "formula_ric": v.details["formula_ric"],
            "z_f_degenerate": res.z_f_degenerate,
            "determining_residual_zero": res.z_f_degenerate or is_zero(res.residual, plan),
        }
        return verdict
    if kind == "generalized":
        Z = _field(payload["field"], params)
        v = generalized_integral_check(E, Z, plan)
        return {"kind": kind, "field": Z.as_dict(), "pass": v.ok, **v.details}
    if kind == "complete":
        gens = [_field(g, params) for g in payload["generators"]]
        v = complete_integral_check(E, Distribution(gens), plan)
        return {"kind": kind, "generators": [g.as_dict() for g in gens], "pass": v.ok, **v.details}
    if kind == "chart":
        chart = ContactChart([parse(c, params) for c in payload["components"]])
        v = contact_chart_check(chart, plan)
        out = {"kind": kind, "components": chart.as_list(), "pass": v.ok, "factor_at_base": v.factor_at_base}
        if v.reason:
            out["reason"] = v.reason
        if v.ok:
            cand_inv = payload.get("inverse")
            cand_inv = [parse(c, params) for c in cand_inv] if cand_inv else None
            try:
                inv = invert_chart(chart, plan, cand_inv)
                D = characteristic_distribution(E, plan)
                pushed = Distribution([pushforward(chart, X, plan, inv) for X in D.generators])
                E2 = equation_from_distribution(pushed, plan)
                out["inverse"] = inv.as_list()
                out["transformed_generators"] = pushed.as_list()
                out["transformed_equation"] = E2.echo()
                out["transformed_display"] = E2.display
            except ChartError as exc:
                out["transformed_equation"] = None
                out["reason"] = f"pushforward unavailable: {exc}"
        return out
    raise JobError(f"unknown candidate kind {kind!r}")


# --------------------------------------------------------------- reports


@dataclass
class ReportDocument:
    command: str
    tool_version: str
    seed: int
    plan: dict
    job: dict
    warnings: list
    result: dict

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tool": {"name": "mongeampere", "version": self.tool_version},
            "seed": self.seed,
            "plan": self.plan,
            "job": self.job,
            "warnings": self.warnings,
            "result": self.result,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        return cls(
            command=d["command"],
            tool_version=d["tool"]["version"],
            seed=d["seed"],
            plan=d["plan"],
            job=d["job"],
            warnings=d["warnings"],
            result=d["result"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))


def run_job(command: str, job: Job) -> ReportDocument:
    E, plan = job.equation, job.plan
    if command == "classify":
        result = classify(E, plan).as_dict()
        if job.candidates:
            result["candidates"] = [run_candidate(job, c) for c in job.candidates]
    elif command == "check":
        if not job.candidates:
            raise JobError("check needs at least one candidate in the job")
        result = {"candidates": [run_candidate(job, c) for c in job.candidates]}
        result["all_pass"] = all(c["pass"] for c in result["candidates"])
    elif command == "determining":
        pde = determining_pde(E, plan)
        result = {"determining_pde": pde.as_dict(), "checks": []}
        for c in job.candidates:
            if c["kind"] == "intermediate":
                f = parse(c["payload"]["f"], job.params)
                result["checks"].append({"f": to_string(f), "pde_residual_zero": is_zero(pde.apply(f), plan)})
    else:
        raise JobError(f"unknown command {command!r}")
    return ReportDocument(command, __version__, plan.seed, plan_to_dict(plan), job.echo(), list(job.warnings), result)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (JobError, ExprSyntaxError, json.JSONDecodeError)):
        return EXIT_PARSE
    if isinstance(exc, NonConstantRankError):
        return EXIT_RANK
    if isinstance(exc, NotParabolicError):
        return EXIT_NOT_PARABOLIC
    if isinstance(exc, OSError):
        return EXIT_USAGE
    if isinstance(exc, MongeAmpereError):
        return EXIT_ANALYSIS
    raise exc


def process(command: str, path: str, overrides: dict) -> tuple[int, str | None, str]:
    """Run one job file; returns (exit code, report text or None, diagnostic)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
        doc = json.loads(text)
        job = build_job(doc, overrides)
        report = run_job(command, job)
        return EXIT_OK, report.to_json(), ""
    except json.JSONDecodeError as exc:
        return EXIT_PARSE, None, f"{path}: invalid JSON: {exc}"
    except ExprSyntaxError as exc:
        return EXIT_PARSE, None, f"{path}: expression error at byte {exc.offset}: {exc.message}"
    except Exception as exc:  # mapped to the documented codes; anything else propagates
        code = _exit_code(exc)
        return code, None, f"{path}: {exc}"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_base(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("--base needs five comma-separated numbers")
    try:
        return tuple(_number(p) for p in parts)
    except (JobError, ExprSyntaxError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mongeampere", description="Classify parabolic Monge-Ampere equations and verify integrals.")
    ap.add_argument("--version", action="version", version=f"mongeampere {__version__}")
    subs = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("classify", "classify the equation of a job"),
        ("check", "verify the candidates of a job"),
        ("determining", "emit the determining PDE of a job"),
    ):
        sp = subs.add_parser(name, help=help_text)
        sp.add_argument("job", nargs="?", help="job file (JSON)")
        sp.add_argument("--jobs", metavar="DIR", help="process every *.json job in DIR")
        sp.add_argument("--out", metavar="PATH", help="report file (a directory with --jobs)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--base", type=_parse_base, metavar="x,y,z,p,q")
        sp.add_argument("--exact", action="store_true", default=None, help="exact rational arithmetic")
        sp.add_argument("--workers", type=int, default=1, help="parallel workers with --jobs")
    return ap


def _batch_one(args):
    command, path, overrides, out_dir = args
    code, text, diag = process(command, str(path), overrides)
    if text is not None:
        _write_atomic(out_dir / (path.stem + ".report.json"), text)
    return path.name, code, diag


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    if args.samples is not None and args.samples < 1:
        ap.error("--samples must be positive")
    overrides = {"seed": args.seed, "samples": args.samples, "base": args.base, "exact": args.exact}
    if args.jobs:
        if args.job:
            ap.error("give either a job file or --jobs, not both")
        src = Path(args.jobs)
        if not src.is_dir():
            print(f"{src}: not a directory", file=sys.stderr)
            return EXIT_USAGE
        out_dir = Path(args.out) if args.out else src / "reports"
        files = sorted(p for p in src.glob("*.json"))
        tasks = [(args.command, p, overrides, out_dir) for p in files]
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                results = list(pool.map(_batch_one, tasks))
        else:
            results = [_batch_one(t) for t in tasks]
        worst = EXIT_OK
        for name, code, diag in results:
            if code:
                print(diag, file=sys.stderr)
            worst = max(worst, code)
        return worst
    if not args.job:
        ap.error("a job file is required")
    code, text, diag = process(args.command, args.job, overrides)
    if code:
        print(diag, file=sys.stderr)
        return code
    if args.out:
        try:
            _write_atomic(Path(args.out), text)
        except OSError as exc:
            print(f"{args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

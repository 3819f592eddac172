import math
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import rand_poly, rand_smooth
from mongeampere.errors import (
    DomainError,
    EvaluationError,
    ExactModeError,
    ExprSyntaxError,
    FormalOrderError,
    SamplingError,
    UnboundSymbolError,
    UnknownIdentifierError,
)
from mongeampere.symexpr import (
    COORDS,
    ZERO,
    Const,
    FormalPartial,
    SamplePlan,
    Symbol,
    diff,
    evaluate,
    is_zero,
    parse,
    substitute,
    to_string,
    zero_pattern,
)

PLAN = SamplePlan()


# ----------------------------------------------------------------- parsing


def test_parse_example_z_minus_half_p_squared():
    e = parse("z - p^2/2")
    assert evaluate(e, (0, 0, 3, 2, 0)) == 1
    assert sp.simplify(oracles.to_sympy(e) - (oracles.Z_ - oracles.P_**2 / 2)) == 0


def test_parse_zero_is_zero_constant():
    assert parse("0") == ZERO


def test_parse_domain_error_at_y_zero():
    e = parse("q*sin(x) + 1/y")
    with pytest.raises(EvaluationError):
        evaluate(e, (1, 0, 0, 0, 1))


def test_power_binds_tighter_than_unary_minus():
    assert evaluate(parse("-p^2"), (0, 0, 0, 3, 0)) == -9
    assert evaluate(parse("(-p)^2"), (0, 0, 0, 3, 0)) == 9


def test_decimals_and_rationals():
    assert parse("0.25") == Const(Fraction(1, 4))
    assert parse("3/4") == Const(Fraction(3, 4))
    assert evaluate(parse("1.5e1"), (0,) * 5) == 15


@pytest.mark.parametrize(
    "text, offset",
    [("p+*q", 2), ("(p", 2), ("p q", 2), ("2x", 1), ("p +", 3), ("", 0), ("p^q", 2), ("sin x", 4)],
)
def test_syntax_errors_report_byte_offset(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_byte_offsets_count_utf8_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("p + é")
    assert info.value.offset == 4


def test_unknown_identifier_unless_declared():
    with pytest.raises(UnknownIdentifierError):
        parse("k*p")
    e = parse("k*p", params=["k"])
    assert evaluate(e, (0, 0, 0, 2, 0), {"k": 3}) == 6
    with pytest.raises(UnboundSymbolError):
        evaluate(e, (0, 0, 0, 2, 0))


def test_reserved_names_cannot_be_declared():
    with pytest.raises(ValueError):
        parse("x", params=["x"])
    with pytest.raises(ValueError):
        parse("1", functions=["sin"])


def test_formal_function_partials_parse_and_are_symmetric():
    assert parse("f_xy", functions=["f"]) == parse("f_yx", functions=["f"])
    assert isinstance(parse("f_p", functions=["f"]), FormalPartial)
    with pytest.raises(UnknownIdentifierError):
        parse("f_x")


def test_non_integer_exponent_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("p^(1/2)")


def _expr_strategy():
    leaves = st.sampled_from(list(COORDS) + ["1", "2/3", "0.5"])

    def extend(children):
        binop = st.tuples(children, st.sampled_from(["+", "-", "*", "/"]), children).map(
            lambda t: f"({t[0]}) {t[1]} ({t[2]})"
        )
        powr = st.tuples(children, st.integers(-2, 3)).map(lambda t: f"({t[0]})^{t[1]}")
        func = st.tuples(st.sampled_from(["sin", "cos", "exp", "log", "sqrt"]), children).map(
            lambda t: f"{t[0]}({t[1]})"
        )
        neg = children.map(lambda c: f"-({c})")
        return binop | powr | func | neg

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(_expr_strategy())
def test_print_parse_round_trip(text):
    e = parse(text)
    assert parse(to_string(e)) == e


def test_printer_fully_parenthesized():
    assert to_string(parse("p*q + x^2")) in {"((p * q) + (x ^ 2))", "((x ^ 2) + (p * q))"}


# ---------------------------------------------------------- differentiation


def test_diff_examples():
    assert is_zero(diff(parse("z - p^2/2"), "p") + parse("p"), PLAN)
    assert diff(parse("f_x", functions=["f"]), "y") == parse("f_xy", functions=["f"])
    assert is_zero(diff(parse("q*sin(x)"), "x") - parse("q*cos(x)"), PLAN)


def test_diff_order_three_raises():
    with pytest.raises(FormalOrderError):
        diff(parse("f_xy", functions=["f"]), "p")


def test_diff_order_zero_formal():
    assert diff(parse("f", functions=["f"]), "q") == parse("f_q", functions=["f"])


def test_diff_against_sympy():
    rng = random.Random(11)
    for _ in range(100):
        e = rand_smooth(rng)
        i = rng.randrange(5)
        ours = oracles.to_sympy(diff(e, i))
        ref = sp.diff(oracles.to_sympy(e), oracles.COORDS[i])
        pt = dict(zip(oracles.COORDS, (0.3, -0.2, 0.1, 0.25, -0.15)))
        assert float(ours.subs(pt)) == pytest.approx(float(ref.subs(pt)), rel=1e-9, abs=1e-9)


def test_diff_respects_dependency_mask():
    e = parse("sin(x)*exp(y)")
    assert diff(e, "q") == ZERO


# ---------------------------------------------------------------- evaluation


def test_eval_examples():
    assert evaluate(parse("z - p^2/2"), (0, 0, 3, 2, 0)) == 1
    Delta = parse("B^2 - 4*A*C + 4*N*D", params="NABCD")
    assert evaluate(Delta, (1, 2, 3, 4, 5), dict(N=1, A=0, B=0, C=0, D=0)) == 0
    assert evaluate(parse("p*q - sin(x)"), (1, 0, 0, 2, 3)) == pytest.approx(5.158529, abs=1e-6)


def test_eval_exact_for_rational_grammar():
    v = evaluate(parse("(x + 1/3)/(p^2 + 1)"), (Fraction(1, 2), 0, 0, Fraction(1, 3), 0))
    assert isinstance(v, Fraction) and v == Fraction(3, 4)


def test_eval_float_for_transcendental():
    assert isinstance(evaluate(parse("exp(x)"), (0.5, 0, 0, 0, 0)), float)


def test_exact_mode_rejects_transcendental():
    with pytest.raises(ExactModeError):
        evaluate(parse("sin(x)"), (Fraction(1, 2), 0, 0, 0, 0), exact=True)


def test_exact_sqrt_of_square():
    assert evaluate(parse("sqrt(p^2)"), (0, 0, 0, Fraction(2, 3), 0), exact=True) == Fraction(2, 3)


@pytest.mark.parametrize("text", ["1/(x - x)", "log(-1 - x^2)", "sqrt(-1 - p^2)"])
def test_domain_errors(text):
    with pytest.raises(DomainError):
        evaluate(parse(text), (0.1, 0.2, 0.3, 0.4, 0.5))


def test_point_needs_five_coordinates():
    with pytest.raises(ValueError):
        evaluate(parse("x"), (1, 2))


# ---------------------------------------------------------------- zero test


def test_is_zero_examples():
    assert is_zero(parse("p - p"), PLAN)
    box_at_z1 = PLAN.replace(base=(0, 0, 1, 0, 0))
    assert not is_zero(parse("z"), box_at_z1)


def test_is_zero_catches_cancellation():
    assert is_zero(parse("(x + p)^2 - x^2 - 2*x*p - p^2"), PLAN)
    assert is_zero(parse("sin(x)^2 + cos(x)^2 - 1"), PLAN)
    assert not is_zero(parse("sin(x)^2 + cos(x)^2 - 1 + 1/1000000"), PLAN)


def test_is_zero_redraws_then_fails():
    # singular on a hyperplane avoided by redraws
    assert not is_zero(parse("1/(x - 1/3)"), PLAN)
    with pytest.raises(SamplingError):
        is_zero(parse("log(-1 - x^2)"), PLAN)


def test_exact_zero_test_requires_literal_zero():
    exact = PLAN.replace(exact=True)
    assert is_zero(parse("(x + p)^2 - x^2 - 2*x*p - p^2"), exact)
    assert not is_zero(parse("1/10000000000000"), exact)
    assert is_zero(parse("1/10000000000000"), PLAN)


def test_is_zero_deterministic_under_seed():
    e = parse("x - 1/3")
    pats = {tuple(zero_pattern(e, PLAN)) for _ in range(5)}
    assert len(pats) == 1
    a = [next(iter(PLAN.points())) for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_plan_validation():
    with pytest.raises(ValueError):
        SamplePlan(samples=0)
    with pytest.raises(ValueError):
        SamplePlan(eps_zero=0)
    with pytest.raises(ValueError):
        SamplePlan(half_width=-1)


def test_points_lie_in_box():
    plan = SamplePlan(base=(0, 0, 0, 0, 0), half_width=(1, 2, 3, 4, 5))
    it = plan.points()
    for _ in range(50):
        pt = next(it)
        assert all(abs(c) <= h for c, h in zip(pt, (1, 2, 3, 4, 5)))


# -------------------------------------------------------------- substitution


def test_substitute_identity_is_structural_identity():
    rng = random.Random(5)
    ident = {c: Symbol(c) for c in COORDS}
    for _ in range(50):
        e = rand_smooth(rng)
        assert substitute(e, ident) == e


def test_substitute_composes():
    e = parse("x*p + q")
    out = substitute(e, {"x": parse("y + 1"), "q": parse("p^2")})
    assert is_zero(out - parse("(y + 1)*p + p^2"), PLAN)


def test_substitute_formal_partials():
    e = parse("f_x*f_y + f_xy", functions=["f"])
    out = substitute(e, {FormalPartial("f", (0,)): parse("2"), FormalPartial("f", (1,)): parse("p"), FormalPartial("f", (0, 1)): ZERO})
    assert is_zero(out - parse("2*p"), PLAN)


def test_basic_simplification_folds_constants():
    assert parse("0*x + 1*p - 0") == parse("p")
    assert parse("2*3") == Const(6)
    assert parse("p^0") == Const(1)


def test_float_evaluation_matches_sympy_on_polynomials():
    rng = random.Random(2)
    for _ in range(30):
        e = rand_poly(rng, 3, 5)
        pt = (0.3, -0.4, 0.2, 0.7, -0.1)
        ref = float(oracles.to_sympy(e).subs(dict(zip(oracles.COORDS, pt))))
        assert evaluate(e, pt, exact=False) == pytest.approx(ref, rel=1e-12, abs=1e-12)
        assert math.isfinite(evaluate(e, pt, exact=False))

import random
from itertools import combinations

import pytest
import sympy as sp

import oracles
from helpers import rand_nonvanishing, rand_poly
from mongeampere.contact import DP, DQ, DU, HAT_X, HAT_Y, interior, wedge
from mongeampere.distrib import Distribution, is_lagrangian, same_span
from mongeampere.equation import (
    CONTACT_FRAME,
    FIRST,
    SECOND,
    CharacteristicForm,
    MAEquation,
    PointClass,
    characteristic_distribution,
    degeneracy_data,
    determining_pde,
    determining_residual,
    discriminant,
    equation_from_distribution,
    generators,
    omega_coefficients,
    pointwise_class,
    proportional,
    same_equation,
    to_bryant,
    to_characteristic,
)
from mongeampere.errors import InconsistencyError, MixedDegeneracyError, NotParabolicError
from mongeampere.symexpr import FormalPartial, P, Q, SamplePlan, Z, all_zero, evaluate, free_symbols, is_zero, parse

PLAN = SamplePlan()
PTS = oracles.box_points(6)


def _close(e, ref):
    fr = sp.lambdify(oracles.COORDS, ref)
    for pt in PTS:
        assert evaluate(e, pt, exact=False) == pytest.approx(float(fr(*pt)), rel=1e-9, abs=1e-9)


# ------------------------------------------------------------ discriminant


def test_discriminant_examples():
    assert is_zero(discriminant(MAEquation.coefficients(N=1)), PLAN)
    assert is_zero(discriminant(MAEquation.coefficients(C=1)), PLAN)
    assert evaluate(discriminant(MAEquation.coefficients(A=1, C=-1)), PLAN.base) == 4


def test_pointwise_class_examples():
    assert pointwise_class(MAEquation.coefficients(C=1), plan=PLAN) is PointClass.PARABOLIC
    assert pointwise_class(MAEquation.coefficients(A=1, C=-1), plan=PLAN) is PointClass.HYPERBOLIC
    assert pointwise_class(MAEquation.coefficients(A=1, C=1), plan=PLAN) is PointClass.ELLIPTIC


def test_alternative_forms_are_parabolic():
    rng = random.Random(1)
    for _ in range(10):
        assert is_zero(discriminant(MAEquation.characteristic(rand_poly(rng), rand_poly(rng), rand_poly(rng))), PLAN)
        assert is_zero(discriminant(MAEquation.bryant(rand_poly(rng), rand_poly(rng))), PLAN)


def test_require_parabolic_messages():
    with pytest.raises(NotParabolicError, match="elliptic at base point"):
        characteristic_distribution(MAEquation.coefficients(A=1, C=1), PLAN)
    with pytest.raises(NotParabolicError, match="hyperbolic at base point"):
        characteristic_distribution(MAEquation.coefficients(A=1, C=-1), PLAN)


# ------------------------------------------------------------ conversions


def test_characteristic_conversion_against_expansion_oracle():
    rng = random.Random(2)
    for _ in range(10):
        R, S, T = rand_poly(rng), rand_poly(rng), rand_poly(rng)
        c = MAEquation.characteristic(R, S, T).coefficient_form
        ref = oracles.coefficients_from_characteristic(*(oracles.to_sympy(e) for e in (R, S, T)))
        for e, r in zip((c.N, c.A, c.B, c.C, c.D), ref):
            _close(e, r)


def test_coefficient_to_characteristic_inverts():
    rng = random.Random(3)
    for _ in range(10):
        R, S, T = rand_poly(rng), rand_poly(rng), rand_poly(rng)
        c = MAEquation.characteristic(R, S, T).coefficient_form
        ch = to_characteristic(c)
        assert all_zero([ch.R - R, ch.S - S, ch.T - T], PLAN)


def test_coefficient_to_bryant_inverts():
    rng = random.Random(4)
    for _ in range(10):
        a, b = rand_poly(rng), rand_poly(rng)
        br = to_bryant(MAEquation.bryant(a, b).coefficient_form)
        assert all_zero([br.a - a, br.b - b], PLAN)


def test_omega_restricts_to_the_equation():
    rng = random.Random(5)
    for E in (
        MAEquation.characteristic(rand_poly(rng), rand_poly(rng), rand_poly(rng)),
        MAEquation.bryant(rand_poly(rng), rand_poly(rng)),
        MAEquation.coefficients(N=rand_poly(rng), A=rand_poly(rng), B=rand_poly(rng), C=rand_poly(rng), D=rand_poly(rng)),
    ):
        c = E.coefficient_form
        ref = oracles.equation_from_twoform([oracles.to_sympy(e) for e in E.omega.components()])
        for e, r in zip((c.N, c.A, c.B, c.C, c.D), ref):
            _close(e, r)


def test_omega_coefficients_reads_back_omega():
    rng = random.Random(6)
    c = MAEquation.coefficients(N=rand_poly(rng), A=rand_poly(rng), B=rand_poly(rng), C=rand_poly(rng), D=rand_poly(rng))
    back = omega_coefficients(c.omega)
    f = c.coefficient_form
    assert all_zero([back.N - f.N, back.A - f.A, back.B - f.B, back.C - f.C, back.D - f.D], PLAN)


def test_omega_coefficients_against_oracle_on_random_forms():
    rng = random.Random(7)
    from mongeampere.contact import TwoForm

    w = TwoForm(*(rand_poly(rng) for _ in range(10)))
    ours = omega_coefficients(w)
    ref = oracles.equation_from_twoform([oracles.to_sympy(e) for e in w.components()])
    for e, r in zip((ours.N, ours.A, ours.B, ours.C, ours.D), ref):
        _close(e, r)


def test_build_rejects_unknown_fields():
    with pytest.raises(ValueError):
        MAEquation.build("bryant", {"a": "q", "c": "1"})
    with pytest.raises(ValueError):
        MAEquation.build("nope", {})


def test_display_strings():
    assert MAEquation.bryant("q", "p").display == "t - 2*q*s + q^2*r = p"
    assert "(s - " in MAEquation.characteristic(1, 0, 0).display


# ------------------------------------------------------------ degeneracy


def test_degeneracy_data_alpha_and_k():
    rng = random.Random(8)
    for E in (
        MAEquation.coefficients(C=1),
        MAEquation.coefficients(N=1),
        MAEquation.characteristic(rand_poly(rng), rand_poly(rng), rand_poly(rng)),
        MAEquation.bryant(rand_poly(rng), rand_poly(rng)),
    ):
        d = degeneracy_data(E, PLAN)
        assert is_zero(d.k, PLAN)
        assert is_zero(d.alpha + discriminant(E) * parse("1/4"), PLAN)
        w_lam = E.omega + DU.scale(d.lam)
        vals = [wedge(w_lam, w_lam).pair(*CONTACT_FRAME)]
        assert all_zero(vals, PLAN)


def test_degeneracy_rejects_hyperbolic():
    with pytest.raises(NotParabolicError):
        degeneracy_data(MAEquation.coefficients(A=1, C=-1), PLAN)


def test_omega_matches_characteristic_pair_on_contact_plane():
    rng = random.Random(9)
    for E in (
        MAEquation.characteristic(rand_poly(rng), rand_poly(rng), rand_poly(rng)),
        MAEquation.bryant(rand_poly(rng), rand_poly(rng)),
    ):
        X, Y = generators(E, PLAN)
        xy = wedge(interior(X, DU), interior(Y, DU))
        pairs = list(combinations(CONTACT_FRAME, 2))
        assert proportional([xy.pair(a, b) for a, b in pairs], [E.omega.pair(a, b) for a, b in pairs], PLAN)


# ------------------------------------------------------------ distributions


def test_characteristic_distribution_examples():
    assert same_span(characteristic_distribution(MAEquation.bryant(0, 0), PLAN), Distribution([DP, HAT_Y]), PLAN)
    D3 = characteristic_distribution(MAEquation.bryant("z", "p"), PLAN)
    assert same_span(D3, Distribution([DP + DQ.scale(Z), HAT_Y - HAT_X.scale(Z) + DQ.scale(P)]), PLAN)
    S, T = parse("x*q"), parse("p^2")
    D = characteristic_distribution(MAEquation.characteristic(1, S, T), PLAN)
    assert same_span(D, Distribution([HAT_X + DP + DQ.scale(S), HAT_Y + DP.scale(S) + DQ.scale(T)]), PLAN)


@pytest.mark.parametrize("branch", ["N", "C", "A"])
def test_coefficient_branches_are_lagrangian_and_round_trip(branch):
    rng = random.Random(10)
    for _ in range(5):
        if branch == "N":
            N = rand_nonvanishing(rng)
            R, S, T = rand_poly(rng), rand_poly(rng), rand_poly(rng)
            E = MAEquation.coefficients(N=N, A=-N * T, B=2 * N * S, C=-N * R, D=-N * (S**2 - R * T))
        elif branch == "C":
            C, a, b = rand_nonvanishing(rng), rand_poly(rng), rand_poly(rng)
            E = MAEquation.coefficients(A=C * a**2, B=-2 * a * C, C=C, D=-b * C)
        else:
            E = MAEquation.coefficients(A=rand_nonvanishing(rng), D=rand_poly(rng))
        D = characteristic_distribution(E, PLAN)
        assert is_lagrangian(D, PLAN)
        E2 = equation_from_distribution(D, PLAN)
        assert same_equation(E, E2, PLAN)
        assert same_span(characteristic_distribution(E2, PLAN), D, PLAN)


def test_ar_plus_d_pair():
    D = characteristic_distribution(MAEquation.coefficients(A=1, D=parse("-x")), PLAN)
    assert same_span(D, Distribution([DQ, HAT_X + DP.scale(parse("x"))]), PLAN)


def test_mixed_degeneracy_reported():
    x0 = next(iter(PLAN.points())).x
    N = parse(f"x - {x0}")
    E = MAEquation.coefficients(N=N, C=1)
    with pytest.raises(MixedDegeneracyError):
        characteristic_distribution(E, PLAN)


def test_equation_from_distribution_examples():
    E = equation_from_distribution(Distribution([DP, HAT_Y]), PLAN)
    assert same_equation(E, MAEquation.coefficients(C=1), PLAN)
    E2 = equation_from_distribution(Distribution([DP, HAT_Y + DQ.scale(P)]), PLAN)
    assert same_equation(E2, MAEquation.bryant(0, "p"), PLAN)


def test_equation_from_distribution_rejects_non_lagrangian():
    with pytest.raises(InconsistencyError):
        equation_from_distribution(Distribution([HAT_X, DP]), PLAN)


def test_same_equation_distinguishes():
    assert not same_equation(MAEquation.bryant(0, "p"), MAEquation.bryant(0, "q"), PLAN)
    assert same_equation(MAEquation.bryant("q", "p"), MAEquation.coefficients(A="2*q^2", B="-4*q", C=2, D="-2*p"), PLAN)


# ------------------------------------------------------------ determining PDE


def _formal_orders(e):
    return {s.order for s in free_symbols(e) if isinstance(s, FormalPartial)}


def test_determining_pde_structure():
    pde = determining_pde(MAEquation.bryant("q", "p"), PLAN)
    for i in range(5):
        for j in range(5):
            assert pde.A[i][j] == pde.A[j][i]
            assert 2 not in _formal_orders(pde.A[i][j])
    assert 2 not in _formal_orders(pde.B)
    assert len(pde.as_dict()) == 16


def test_determining_pde_matches_residual():
    rng = random.Random(11)
    for E in (MAEquation.bryant("z", "p"), MAEquation.bryant("q", "p"), MAEquation.characteristic(1, parse("x*q"), parse("z"))):
        pde = determining_pde(E, PLAN)
        for _ in range(3):
            f = rand_poly(rng, 2, 4)
            res = determining_residual(E, f, PLAN)
            assert all_zero([pde.apply(f) - res.residual], PLAN)


def test_determining_examples():
    E1 = MAEquation.bryant(0, 0)
    assert is_zero(determining_pde(E1, PLAN).apply(parse("x")), PLAN)
    assert determining_residual(E1, parse("x"), PLAN).z_f_degenerate
    E2 = MAEquation.bryant(0, "p")
    assert determining_residual(E2, parse("x"), PLAN).z_f_degenerate
    # X(z) = 0 makes Z_z = q d/dp, a type-2 field inside D: the residual vanishes
    r = determining_residual(E2, parse("z"), PLAN)
    assert not r.z_f_degenerate and is_zero(r.residual, PLAN)
    r = determining_residual(E2, parse("x*p + q"), PLAN)
    assert not r.z_f_degenerate and not is_zero(r.residual, PLAN)
    E3 = MAEquation.bryant("z", "p")
    assert not is_zero(determining_pde(E3, PLAN).apply(parse("q")), PLAN)


def test_determining_zero_set_invariant_under_scaling():
    rng = random.Random(12)
    E = MAEquation.bryant("q", "p")
    for _ in range(5):
        f = rand_poly(rng, 2, 3)
        r1 = determining_residual(E, f, PLAN).residual
        r2 = determining_residual(E, f * 2, PLAN).residual
        assert is_zero(r1, PLAN) == is_zero(r2, PLAN)
        assert is_zero(r2 - r1 * 8, PLAN)


def test_formal_symbols_registry():
    assert len(FIRST) == 5 and len(SECOND) == 15

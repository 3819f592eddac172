"""Monge-Ampere equations N(rt - s^2) + Ar + Bs + Ct + D = 0 on J^1.

An equation is entered in one of three forms: coefficients (N, A, B, C, D),
characteristic data (R, S, T) for (s - S)^2 - (r - R)(t - T) = 0, or Bryant
data (a, b) for t - 2as + a^2 r = b. Each form is converted to coefficients
for the discriminant and the 2-form, and to a pair of generators for the
characteristic distribution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union

from .contact import DP, DQ, DU, HAT_X, HAT_Y, U, Form, TwoForm, VectorField, hamiltonian_vector, lie_bracket, wedge
from .distrib import Distribution, is_lagrangian
from .errors import EvaluationError, InconsistencyError, MixedDegeneracyError, NotParabolicError
from .linalg import rank as matrix_rank
from .symexpr import (
    COORDS,
    ONE,
    ZERO,
    Expr,
    FormalPartial,
    P,
    Q,
    SamplePlan,
    add,
    as_expr,
    div,
    free_symbols,
    is_zero,
    mul,
    neg,
    parse,
    power,
    sample,
    sub,
    substitute,
    to_string,
    value_is_zero,
    zero_pattern,
)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class CoefficientForm:
    N: Expr
    A: Expr
    B: Expr
    C: Expr
    D: Expr

    kind = "coefficients"

    def fields(self) -> dict:
        return {"N": self.N, "A": self.A, "B": self.B, "C": self.C, "D": self.D}


@dataclass(frozen=True)
class CharacteristicForm:
    R: Expr
    S: Expr
    T: Expr

    kind = "characteristic"

    def fields(self) -> dict:
        return {"R": self.R, "S": self.S, "T": self.T}


@dataclass(frozen=True)
class BryantForm:
    a: Expr
    b: Expr

    kind = "bryant"

    def fields(self) -> dict:
        return {"a": self.a, "b": self.b}


InputForm = Union[CoefficientForm, CharacteristicForm, BryantForm]
_FORM_TYPES = {"coefficients": CoefficientForm, "characteristic": CharacteristicForm, "bryant": BryantForm}
_FORM_FIELDS = {"coefficients": "NABCD", "characteristic": "RST", "bryant": "ab"}


def _p(e: Expr) -> str:
    return to_string(e)


class MAEquation:
    """A Monge-Ampere equation in one of the three input forms."""

    def __init__(self, form: InputForm):
        if not isinstance(form, (CoefficientForm, CharacteristicForm, BryantForm)):
            raise TypeError("unknown equation form")
        self.form = form

    @classmethod
    def build(cls, kind: str, values: Mapping, params: Iterable[str] = ()) -> "MAEquation":
        """Construct from expression strings (or expressions); missing entries are 0."""
        if kind not in _FORM_TYPES:
            raise ValueError(f"unknown equation form {kind!r}")
        names = _FORM_FIELDS[kind]
        extra = set(values) - set(names)
        if extra:
            raise ValueError(f"unexpected fields for {kind} form: {sorted(extra)}")
        params = tuple(params)
        args = []
        for n in names:
            v = values.get(n, 0)
            args.append(parse(v, params) if isinstance(v, str) else as_expr(v))
        return cls(_FORM_TYPES[kind](*args))

    @classmethod
    def coefficients(cls, N=0, A=0, B=0, C=0, D=0, params=()) -> "MAEquation":
        return cls.build("coefficients", dict(N=N, A=A, B=B, C=C, D=D), params)

    @classmethod
    def characteristic(cls, R=0, S=0, T=0, params=()) -> "MAEquation":
        return cls.build("characteristic", dict(R=R, S=S, T=T), params)

    @classmethod
    def bryant(cls, a=0, b=0, params=()) -> "MAEquation":
        return cls.build("bryant", dict(a=a, b=b), params)

    @property
    def kind(self) -> str:
        return self.form.kind

    @cached_property
    def coefficient_form(self) -> CoefficientForm:
        f = self.form
        if isinstance(f, CoefficientForm):
            return f
        if isinstance(f, CharacteristicForm):
            # -(rt - s^2) + T r - 2S s + R t + S^2 - R T
            return CoefficientForm(
                neg(ONE), f.T, mul(-2, f.S), f.R, sub(power(f.S, 2), mul(f.R, f.T))
            )
        return CoefficientForm(ZERO, power(f.a, 2), mul(-2, f.a), ONE, neg(f.b))

    @cached_property
    def omega(self) -> Form:
        """Representative 2-form whose restriction to graphs gives the equation.

        The free function of the representative family is set to zero.
        """
        c = self.coefficient_form
        half_b = mul(HALF, c.B)
        # basis: xy xz xp xq yz yp yq zp zq pq
        return TwoForm(c.D, ZERO, half_b, c.C, ZERO, neg(c.A), neg(half_b), ZERO, ZERO, c.N)

    def echo(self) -> dict:
        return {"form": self.kind, **{k: _p(v) for k, v in self.form.fields().items()}}

    @property
    def display(self) -> str:
        f = self.form
        if isinstance(f, CharacteristicForm):
            return f"(s - {_p(f.S)})^2 - (r - {_p(f.R)})*(t - {_p(f.T)}) = 0"
        if isinstance(f, BryantForm):
            return f"t - 2*{_p(f.a)}*s + {_p(f.a)}^2*r = {_p(f.b)}"
        return f"{_p(f.N)}*(r*t - s^2) + {_p(f.A)}*r + {_p(f.B)}*s + {_p(f.C)}*t + {_p(f.D)} = 0"

    def __repr__(self) -> str:
        return f"MAEquation({self.display})"


# --------------------------------------------------------------- discriminant


class PointClass(str, enum.Enum):
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


def discriminant(E: MAEquation) -> Expr:
    """B^2 - 4AC + 4ND."""
    c = E.coefficient_form
    return add(power(c.B, 2), mul(-4, c.A, c.C), mul(4, c.N, c.D))


def pointwise_class(E: MAEquation, pt=None, plan: SamplePlan | None = None) -> PointClass:
    plan = plan or SamplePlan()
    pt = plan.base_point if pt is None else pt
    v, s = plan.evaluator(pt).with_scale(discriminant(E))
    if value_is_zero(v, s, plan):
        return PointClass.PARABOLIC
    return PointClass.HYPERBOLIC if v > 0 else PointClass.ELLIPTIC


def require_parabolic(E: MAEquation, plan: SamplePlan) -> None:
    delta = discriminant(E)
    if not is_zero(delta, plan):
        cls = pointwise_class(E, plan.base_point, plan)
        if cls is PointClass.PARABOLIC:
            raise NotParabolicError("discriminant vanishes at the base point but not on the box", "mixed")
        raise NotParabolicError(f"{cls.value} at base point", cls.value)


@dataclass(frozen=True)
class DegeneracyData:
    """(w^w)|C = alpha (dU^dU)|C and (w^dU)|C = k (dU^dU)|C; double root lam = -k."""

    alpha: Expr
    k: Expr
    lam: Expr


CONTACT_FRAME = (HAT_X, HAT_Y, DP, DQ)


def restricted_top(form4: Form) -> Expr:
    """Value of a 4-form on the frame (d^x, d^y, dp, dq) of the contact plane."""
    return form4.pair(*CONTACT_FRAME)


def degeneracy_data(E: MAEquation, plan: SamplePlan | None = None) -> DegeneracyData:
    plan = plan or SamplePlan()
    w = E.omega
    vol = restricted_top(wedge(DU, DU))
    alpha = div(restricted_top(wedge(w, w)), vol)
    k = div(restricted_top(wedge(w, DU)), vol)
    if not is_zero(sub(power(k, 2), alpha), plan):
        cls = pointwise_class(E, plan.base_point, plan)
        raise NotParabolicError(f"k^2 - alpha does not vanish: {cls.value} at base point", cls.value)
    return DegeneracyData(alpha, k, neg(k))


# ------------------------------------------------------ characteristic pairs


def characteristic_generators(R, S, T) -> tuple[VectorField, VectorField]:
    R, S, T = as_expr(R), as_expr(S), as_expr(T)
    return (HAT_X + DP.scale(R) + DQ.scale(S), HAT_Y + DP.scale(S) + DQ.scale(T))


def bryant_generators(a, b) -> tuple[VectorField, VectorField]:
    a, b = as_expr(a), as_expr(b)
    return (DP + DQ.scale(a), HAT_Y - HAT_X.scale(a) + DQ.scale(b))


def _vanishing(e: Expr, plan: SamplePlan, name: str) -> bool:
    """True if ``e`` vanishes on the whole box, False if nowhere; error if mixed."""
    pattern = zero_pattern(e, plan)
    if all(pattern):
        return True
    if not any(pattern):
        return False
    raise MixedDegeneracyError(f"{name} vanishes at part of the sample box only; shrink the box")


def to_characteristic(c: CoefficientForm) -> CharacteristicForm:
    return CharacteristicForm(neg(div(c.C, c.N)), div(c.B, mul(2, c.N)), neg(div(c.A, c.N)))


def to_bryant(c: CoefficientForm) -> BryantForm:
    return BryantForm(neg(div(c.B, mul(2, c.C))), neg(div(c.D, c.C)))


def generators(E: MAEquation, plan: SamplePlan | None = None) -> tuple[VectorField, VectorField]:
    plan = plan or SamplePlan()
    f = E.form
    if isinstance(f, CharacteristicForm):
        return characteristic_generators(f.R, f.S, f.T)
    if isinstance(f, BryantForm):
        return bryant_generators(f.a, f.b)
    if not _vanishing(f.N, plan, "N"):
        ch = to_characteristic(f)
        # matching the constant term is exactly parabolicity
        if not is_zero(add(f.D, mul(f.N, sub(power(ch.S, 2), mul(ch.R, ch.T)))), plan):
            raise InconsistencyError("constant term does not match the characteristic form")
        return characteristic_generators(ch.R, ch.S, ch.T)
    if not _vanishing(f.C, plan, "C"):
        br = to_bryant(f)
        return bryant_generators(br.a, br.b)
    if not is_zero(f.B, plan):
        raise InconsistencyError("N = C = 0 with B != 0 is not parabolic")
    if _vanishing(f.A, plan, "A"):
        raise InconsistencyError("all second-order coefficients vanish; not a second-order equation")
    # A r + D = 0: the x <-> y mirror of the C != 0 case
    b = neg(div(f.D, f.A))
    return (DQ, HAT_X + DP.scale(b))


def characteristic_distribution(E: MAEquation, plan: SamplePlan | None = None) -> Distribution:
    """Radical of the degenerate 2-form on the contact plane, as a generator pair."""
    plan = plan or SamplePlan()
    require_parabolic(E, plan)
    return Distribution(generators(E, plan))


def omega_coefficients(w: Form) -> CoefficientForm:
    """Coefficients of the equation cut out by a 2-form on 1-jet graphs."""
    g = lambda a, b: w[(COORDS.index(a), COORDS.index(b))]  # noqa: E731
    N = g("p", "q")
    A = sub(neg(g("y", "p")), mul(Q, g("z", "p")))
    B = add(g("x", "p"), neg(g("y", "q")), mul(P, g("z", "p")), neg(mul(Q, g("z", "q"))))
    C = add(g("x", "q"), mul(P, g("z", "q")))
    D = add(g("x", "y"), mul(Q, g("x", "z")), neg(mul(P, g("y", "z"))))
    return CoefficientForm(N, A, B, C, D)


def equation_from_distribution(D: Distribution, plan: SamplePlan | None = None) -> MAEquation:
    """The equation whose characteristic distribution is the lagrangian D."""
    plan = plan or SamplePlan()
    if not is_lagrangian(D, plan):
        raise InconsistencyError("equation_from_distribution needs a rank-2 lagrangian distribution")
    X, Y = D.pruned(plan).generators
    w = wedge(DU.interior(X), DU.interior(Y))
    c = omega_coefficients(w)
    if not _vanishing(c.N, plan, "N"):
        return MAEquation(to_characteristic(c))
    if not _vanishing(c.C, plan, "C"):
        return MAEquation(to_bryant(c))
    return MAEquation(c)


def proportional(u, v, plan: SamplePlan | None = None) -> bool:
    """Vectors of expressions proportional at every sample (neither identically zero)."""
    plan = plan or SamplePlan()
    u, v = list(u), list(v)
    n = len(u)
    for _, vals, scales in sample(u + v, plan):
        clean = [0 if value_is_zero(x, s, plan) else x for x, s in zip(vals, scales)]
        a, b = clean[:n], clean[n:]
        if not any(a) or not any(b):
            return False
        if matrix_rank([a, b], plan.eps_rank, plan.exact) != 1:
            return False
    return True


def same_equation(E1: MAEquation, E2: MAEquation, plan: SamplePlan | None = None) -> bool:
    """Equal up to an overall nonvanishing factor."""
    c1, c2 = E1.coefficient_form, E2.coefficient_form
    return proportional(c1.fields().values(), c2.fields().values(), plan)


# -------------------------------------------------------- determining PDE

FORMAL = "f"
FIRST = tuple(FormalPartial(FORMAL, (i,)) for i in range(len(COORDS)))
SECOND = {(i, j): FormalPartial(FORMAL, (i, j)) for i in range(len(COORDS)) for j in range(i, len(COORDS))}


@dataclass(frozen=True)
class DeterminingPDE:
    """sum_ij A[i][j] f_ij + B = 0 in the coordinates (x, y, z, p, q)."""

    A: tuple
    B: Expr

    def coefficient(self, i: int, j: int) -> Expr:
        return self.A[i][j]

    def apply(self, f) -> Expr:
        """Left-hand side with the partials of a concrete function substituted."""
        from .symexpr import diff

        f = as_expr(f)
        first = [diff(f, i) for i in range(len(COORDS))]
        mapping = {FIRST[i]: first[i] for i in range(len(COORDS))}
        mapping[FormalPartial(FORMAL)] = f
        terms = []
        for (i, j), sym in SECOND.items():
            fij = diff(first[i], j)
            c = self.A[i][j] if i == j else mul(2, self.A[i][j])
            terms.append(mul(c, fij))
        return substitute(add(*terms, self.B), mapping)

    def as_dict(self) -> dict:
        out = {}
        for (i, j) in SECOND:
            out[f"A_{COORDS[i]}{COORDS[j]}"] = to_string(self.A[i][j])
        out["B"] = to_string(self.B)
        return out


def _residual_form(X: VectorField, Y: VectorField, f: Expr) -> Expr:
    Xf = hamiltonian_vector(f)
    xf, yf = X.apply(f), Y.apply(f)
    t1 = DU.pair(X, lie_bracket(X, Xf))
    t2 = DU.pair(X, lie_bracket(Y, Xf))
    t3 = DU.pair(Y, lie_bracket(Y, Xf))
    return add(mul(power(yf, 2), t1), mul(-2, xf, yf, t2), mul(power(xf, 2), t3))


def determining_pde(E: MAEquation, plan: SamplePlan | None = None) -> DeterminingPDE:
    """Second-order PDE for f whose solutions make Z_f a generalized integral.

    The bilinear expression in the characteristic pair is the same for any
    generating pair of the (lagrangian) distribution, so the pair produced
    by :func:`generators` is used directly.
    """
    plan = plan or SamplePlan()
    require_parabolic(E, plan)
    X, Y = generators(E, plan)
    expr = _residual_form(X, Y, FormalPartial(FORMAL))
    zeros = {s: ZERO for s in SECOND.values()}
    B = substitute(expr, zeros)
    n = len(COORDS)
    A = [[ZERO] * n for _ in range(n)]
    for (i, j), sym in SECOND.items():
        probe = dict(zeros)
        probe[sym] = ONE
        c = sub(substitute(expr, probe), B)
        if i != j:
            c = mul(HALF, c)
        A[i][j] = A[j][i] = c
    for e in [B] + [A[i][j] for (i, j) in SECOND]:
        if any(s.order == 2 for s in free_symbols(e) if isinstance(s, FormalPartial)):
            raise InconsistencyError("second-order formal symbol left inside a coefficient")
    return DeterminingPDE(tuple(tuple(r) for r in A), B)


@dataclass(frozen=True)
class Residual:
    residual: Expr
    z_f_degenerate: bool


def determining_residual(E: MAEquation, f, plan: SamplePlan | None = None) -> Residual:
    """dU(Z_f, [Z_f, X_f]) with Z_f = Y(f) X - X(f) Y."""
    plan = plan or SamplePlan()
    require_parabolic(E, plan)
    f = as_expr(f)
    X, Y = generators(E, plan)
    Zf = X.scale(Y.apply(f)) - Y.scale(X.apply(f))
    if Zf.vanishes(plan):
        return Residual(ZERO, True)
    Xf = hamiltonian_vector(f)
    return Residual(DU.pair(Zf, lie_bracket(Zf, Xf)), False)

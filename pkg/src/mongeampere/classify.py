"""Classification pipeline and verification of integrals and charts."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .contact import (
    DP,
    DQ,
    DU,
    U,
    CartanField,
    Form,
    VectorField,
    cartan_type,
    constant_rank,
    exterior_d,
    hamiltonian_field,
    wedge,
)
from .distrib import (
    Distribution,
    Flag,
    flag,
    intersection_dim,
    is_integrable,
    orthogonal_complement,
    span_contains,
)
from .equation import (
    BryantForm,
    DeterminingPDE,
    MAEquation,
    characteristic_distribution,
    determining_pde,
    pointwise_class,
    require_parabolic,
)
from .errors import ChartError, DegenerateFieldError, EvaluationError, InconsistencyError
from .symexpr import (
    COORDS,
    Expr,
    Point,
    SamplePlan,
    Symbol,
    add,
    all_zero,
    as_expr,
    diff,
    div,
    is_zero,
    mul,
    neg,
    sample,
    sub,
    substitute,
    to_string,
    value_is_zero,
)


class NormalForm(str, enum.Enum):
    CLASS1 = "Class1"
    CLASS2 = "Class2"
    CLASS3 = "Class3"
    GENERIC = "Generic"

    @property
    def template(self) -> str:
        return _TEMPLATES[self]


_TEMPLATES = {
    NormalForm.CLASS1: "z_yy=0",
    NormalForm.CLASS2: "z_yy=b",
    NormalForm.CLASS3: "z_yy-2*z*z_xy+z^2*z_xx=b",
    NormalForm.GENERIC: "generic: z_yy-2*a*z_xy+a^2*z_xx=b",
}


@dataclass
class NonholonomicIntegral:
    field: VectorField
    cartan_type: int
    classical: bool

    @property
    def kind(self) -> str:
        return "classical" if self.classical else "genuinely nonholonomic"

    def as_dict(self) -> dict:
        return {"field": self.field.as_dict(), "type": self.cartan_type, "kind": self.kind}


@dataclass
class ClassificationReport:
    discriminant_sign: str
    flag_dims: tuple
    d_integrable: bool
    d2_integrable: Optional[bool]
    normal_form: NormalForm
    nonholonomic: Optional[NonholonomicIntegral] = None
    determining: Optional[DeterminingPDE] = None
    notes: list = field(default_factory=list)

    @property
    def label(self) -> str:
        return self.normal_form.value

    @property
    def template(self) -> str:
        return self.normal_form.template

    def as_dict(self) -> dict:
        out = {
            "discriminant_sign": self.discriminant_sign,
            "flag_dims": list(self.flag_dims),
            "d_integrable": self.d_integrable,
            "d2_integrable": self.d2_integrable,
            "class": self.label,
            "template": self.template,
            "nonholonomic_integral": self.nonholonomic.as_dict() if self.nonholonomic else None,
            "notes": list(self.notes),
        }
        if self.determining is not None:
            out["determining_pde"] = self.determining.as_dict()
        return out


def _decide(dims: tuple, d2_integrable: Optional[bool]) -> NormalForm:
    d0, d1, d2 = dims
    if d0 != 2:
        raise InconsistencyError(f"characteristic distribution has rank {d0}, expected 2")
    if dims == (2, 2, 2):
        return NormalForm.CLASS1
    if d1 != 3:
        raise InconsistencyError(f"derived distribution of a lagrangian plane field has rank {d1}, expected 3")
    if d2 == 4:
        return NormalForm.CLASS2 if d2_integrable else NormalForm.CLASS3
    if d2 == 5:
        return NormalForm.GENERIC
    raise InconsistencyError(f"second derived distribution has rank {d2}; a rank-3 subdistribution of the contact plane cannot be integrable")


def classify(E: MAEquation, plan: SamplePlan | None = None) -> ClassificationReport:
    plan = plan or SamplePlan()
    require_parabolic(E, plan)
    D = characteristic_distribution(E, plan)
    F = flag(D, plan)
    d_int = F.dims[0] == F.dims[1]
    d2_int = is_integrable(F.d2, plan) if F.dims[2] == 4 else None
    nf = _decide(F.dims, d2_int)
    report = ClassificationReport(
        discriminant_sign=pointwise_class(E, plan.base_point, plan).value,
        flag_dims=F.dims,
        d_integrable=d_int,
        d2_integrable=d2_int,
        normal_form=nf,
    )
    if F.dims[2] == 4:
        report.nonholonomic = _nonholonomic_from_flag(F, plan)
    if nf is NormalForm.GENERIC:
        report.determining = determining_pde(E, plan)
        report.notes.append(
            "generic: determining PDE emitted; existence of a complete integral is not decided"
        )
    return report


def _nonholonomic_from_flag(F: Flag, plan: SamplePlan) -> NonholonomicIntegral:
    perp = orthogonal_complement(F.d1, plan)
    if len(perp) != 1:
        raise InconsistencyError(f"orthogonal complement of the derived distribution has {len(perp)} generators")
    X = perp[0]
    t = cartan_type(X, plan)
    if t != 2:
        raise InconsistencyError(f"the generator of the complement of D' has type {t}, expected 2")
    if not span_contains(F.d, X, plan):
        raise InconsistencyError("the generator of the complement of D' is not in D")
    return NonholonomicIntegral(X, t, classical=bool(is_integrable(F.d2, plan)))


def nonholonomic_integral(E: MAEquation, plan: SamplePlan | None = None) -> Optional[NonholonomicIntegral]:
    """The unique type-2 field of D spanning (D')-perp, when dim D'' = 4."""
    plan = plan or SamplePlan()
    F = flag(characteristic_distribution(E, plan), plan)
    if F.dims[2] != 4:
        return None
    return _nonholonomic_from_flag(F, plan)


# ------------------------------------------------------------ integrals


@dataclass
class IntegralVerdict:
    ok: bool
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def formula_ric(E: MAEquation, f) -> Form:
    """The 3-form U ^ df ^ (X_f _| w); it vanishes exactly for intermediate integrals."""
    f = as_expr(f)
    from .contact import hamiltonian_vector

    Xf = hamiltonian_vector(f)
    return wedge(wedge(U, exterior_d(f)), E.omega.interior(Xf))


def intermediate_integral_check(E: MAEquation, f, plan: SamplePlan | None = None) -> IntegralVerdict:
    """X_f in D, cross-checked against the vanishing of U ^ df ^ (X_f _| w)."""
    plan = plan or SamplePlan()
    f = as_expr(f)
    require_parabolic(E, plan)
    Xf = hamiltonian_field(f, plan)
    D = characteristic_distribution(E, plan)
    member = span_contains(D, Xf, plan)
    ric = all_zero(formula_ric(E, f).components(), plan)
    if member != ric:
        raise InconsistencyError(
            f"membership ({member}) and the 3-form criterion ({ric}) disagree for f = {to_string(f)}"
        )
    return IntegralVerdict(member, {"membership": member, "formula_ric": ric})


def complete_integral_check(E: MAEquation, Dhat: Distribution, plan: SamplePlan | None = None) -> IntegralVerdict:
    """Dhat is a rank-2 integrable subdistribution of C on which w vanishes."""
    plan = plan or SamplePlan()
    require_parabolic(E, plan)
    if Dhat.rank(plan) != 2:
        raise InconsistencyError("a complete integral candidate must have rank 2")
    gens = Dhat.pruned(plan).generators
    for g in gens:
        CartanField.of(g, plan)
    integrable = is_integrable(Dhat, plan)
    w_zero = is_zero(E.omega.pair(gens[0], gens[1]), plan)
    D = characteristic_distribution(E, plan)
    dim = intersection_dim(D, Dhat, plan)
    ok = integrable and w_zero
    return IntegralVerdict(ok, {"integrable": integrable, "omega_vanishes": w_zero, "intersection_dim": dim})


def generalized_integral_check(E: MAEquation, Z: VectorField, plan: SamplePlan | None = None) -> IntegralVerdict:
    """Z in D and of type 2 or 3."""
    plan = plan or SamplePlan()
    require_parabolic(E, plan)
    Z = CartanField.of(Z, plan)
    D = characteristic_distribution(E, plan)
    member = span_contains(D, Z, plan)
    t = cartan_type(Z, plan)
    return IntegralVerdict(member and t in (2, 3), {"membership": member, "type": t})


def stock_complete_integral(E: MAEquation) -> Optional[Distribution]:
    """A complete integral known in closed form: <dp, dq> for Bryant input."""
    if isinstance(E.form, BryantForm):
        return Distribution([DP, DQ])
    return None


# ----------------------------------------------------------------- charts


class ContactChart:
    """New coordinates (x', y', z', p', q') as functions of (x, y, z, p, q)."""

    def __init__(self, components: Sequence):
        comps = tuple(as_expr(c) for c in components)
        if len(comps) != 5:
            raise ValueError("a chart needs five component functions")
        self.components = comps

    @classmethod
    def identity(cls) -> "ContactChart":
        return cls(COORDS)

    def pulled_back_form(self) -> Form:
        """U' = dz' - p' dx' - q' dy' written in the old coordinates."""
        xb, yb, zb, pb, qb = self.components
        return exterior_d(zb) - exterior_d(xb).scale(pb) - exterior_d(yb).scale(qb)

    def jacobian(self) -> list[list[Expr]]:
        return [[diff(c, j) for j in range(5)] for c in self.components]

    def compose(self, other: "ContactChart") -> "ContactChart":
        """self after other."""
        mapping = dict(zip(COORDS, other.components))
        return ContactChart([substitute(c, mapping) for c in self.components])

    def as_list(self) -> list[str]:
        return [to_string(c) for c in self.components]


@dataclass
class ChartVerdict:
    ok: bool
    factor_at_base: float | None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def contact_chart_check(chart: ContactChart, plan: SamplePlan | None = None) -> ChartVerdict:
    plan = plan or SamplePlan()
    J = chart.jacobian()
    from .linalg import rank as matrix_rank

    ev = plan.evaluator(plan.base_point)
    try:
        jb = [[ev(e) for e in row] for row in J]
    except EvaluationError as exc:
        raise ChartError(f"chart cannot be evaluated at the base point: {exc}") from exc
    if matrix_rank(jb, plan.eps_rank, plan.exact) < 5:
        raise ChartError("Jacobian of the chart is singular at the base point")
    try:
        jrank = constant_rank(J, plan, "chart Jacobian")
    except Exception:
        jrank = -1
    Ub = chart.pulled_back_form()
    if jrank != 5:
        return ChartVerdict(False, None, "Jacobian singular somewhere on the box")
    if not all_zero(wedge(Ub, U).components(), plan):
        return ChartVerdict(False, None, "pulled-back form is not a multiple of U")
    lam = Ub[2]
    if not all(not value_is_zero(v[0], s[0], plan) for _, v, s in sample([lam], plan)):
        return ChartVerdict(False, None, "pulled-back form vanishes")
    return ChartVerdict(True, float(ev(lam)))


_BAR = tuple(Symbol(f"__bar_{c}") for c in COORDS)


def _affine_solve(g: Expr, v: int, target: Expr) -> Optional[Expr]:
    """Solve g = target for coordinate v when g is affine in v; None otherwise."""
    c = diff(g, v)
    if c.depends_on(v):
        return None
    if c == as_expr(0):
        return None
    rest = substitute(g, {COORDS[v]: 0})
    return div(sub(target, rest), c)


def invert_chart(chart: ContactChart, plan: SamplePlan | None = None, candidate: Sequence | None = None) -> ContactChart:
    """Inverse chart by triangular elimination, or a verified candidate."""
    plan = plan or SamplePlan()
    solved: dict[int, Expr] = {}
    used: set = set()
    progress = True
    while progress and len(solved) < 5:
        progress = False
        for i, comp in enumerate(chart.components):
            if i in used:
                continue
            g = substitute(comp, {COORDS[k]: e for k, e in solved.items()})
            unknown = [v for v in range(5) if v not in solved and g.depends_on(v)]
            if len(unknown) != 1:
                continue
            sol = _affine_solve(g, unknown[0], _BAR[i])
            if sol is None:
                continue
            solved[unknown[0]] = sol
            used.add(i)
            progress = True
    inverse = None
    if len(solved) == 5:
        rename = {b: Symbol(c) for b, c in zip(_BAR, COORDS)}
        inverse = ContactChart([substitute(solved[v], rename) for v in range(5)])
    elif candidate is not None:
        inverse = ContactChart(candidate)
    if inverse is None:
        raise ChartError("chart could not be inverted; supply an inverse candidate")
    roundtrip = chart.compose(inverse)
    if not all_zero([sub(c, Symbol(n)) for c, n in zip(roundtrip.components, COORDS)], plan):
        raise ChartError("inverse candidate does not invert the chart on the box")
    return inverse


def pushforward(chart: ContactChart, X: VectorField, plan: SamplePlan | None = None, inverse: ContactChart | None = None) -> VectorField:
    """X in the new coordinates: components X(phi_i) composed with the inverse."""
    plan = plan or SamplePlan()
    inv = inverse if inverse is not None else invert_chart(chart, plan)
    mapping = dict(zip(COORDS, inv.components))
    return VectorField(*(substitute(X.apply(c), mapping) for c in chart.components))


def flow(X: VectorField, start: Sequence, step: float, n: int, plan: SamplePlan | None = None) -> list[Point]:
    """Classical fourth-order Runge-Kutta trajectory of X, ``n`` steps of ``step``."""
    plan = plan or SamplePlan()
    bindings = plan.binding_map
    from .symexpr import Evaluator

    def rhs(pt):
        ev = Evaluator(pt, bindings, exact=False)
        return [ev(c) for c in X.coeffs]

    pt = [float(c) for c in start]
    out = [Point(*pt)]
    h = float(step)
    for _ in range(n):
        k1 = rhs(pt)
        k2 = rhs([a + h / 2 * b for a, b in zip(pt, k1)])
        k3 = rhs([a + h / 2 * b for a, b in zip(pt, k2)])
        k4 = rhs([a + h * b for a, b in zip(pt, k3)])
        pt = [a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(pt, k1, k2, k3, k4)]
        out.append(Point(*pt))
    return out

"""The contact manifold J^1: forms, vector fields, Lie operations, types.

Coordinates are (x, y, z, p, q) with contact form U = dz - p dx - q dy.
Forms of any degree are stored sparsely on the lexicographic basis of
increasing index tuples, so a 2-form lists dx^dy, dx^dz, ..., dp^dq.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateFieldError, InconsistencyError, NonConstantRankError, NotCartanError
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
    diff,
    free_symbols,
    is_const,
    mul,
    neg,
    sample,
    sub,
    to_string,
    value_is_zero,
)

N_COORDS = len(COORDS)
IX, IY, IZ, IP, IQ = range(N_COORDS)


def _is_literal_zero(e: Expr) -> bool:
    return is_const(e, 0)


class VectorField:
    """Five coefficient expressions on the frame d/dx, d/dy, d/dz, d/dp, d/dq."""

    __slots__ = ("coeffs",)

    def __init__(self, *coeffs):
        if len(coeffs) == 1 and not isinstance(coeffs[0], (Expr, str, int)):
            coeffs = tuple(coeffs[0])
        if len(coeffs) != N_COORDS:
            raise ValueError("a vector field needs five coefficients")
        self.coeffs = tuple(as_expr(c) for c in coeffs)

    @classmethod
    def from_mapping(cls, m: Mapping) -> "VectorField":
        return cls(*(m.get(c, 0) for c in COORDS))

    def __getitem__(self, i: int) -> Expr:
        return self.coeffs[i]

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(sub(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "VectorField":
        return VectorField(*(neg(a) for a in self.coeffs))

    def scale(self, mu) -> "VectorField":
        mu = as_expr(mu)
        return VectorField(*(mul(mu, a) for a in self.coeffs))

    def __rmul__(self, mu) -> "VectorField":
        return self.scale(mu)

    def apply(self, f) -> Expr:
        """Directional derivative X(f)."""
        f = as_expr(f)
        return add(*(mul(c, diff(f, i)) for i, c in enumerate(self.coeffs) if not _is_literal_zero(c)))

    def contact_value(self) -> Expr:
        """U(X) = c_z - p c_x - q c_y."""
        return contact_form().pair(self)

    def is_cartan(self, plan: SamplePlan | None = None) -> bool:
        from .symexpr import is_zero

        return is_zero(self.contact_value(), plan or SamplePlan())

    def vanishes(self, plan: SamplePlan | None = None) -> bool:
        """True when every coefficient is zero at every sample point."""
        from .symexpr import all_zero

        return all_zero(self.coeffs, plan or SamplePlan())

    def as_dict(self) -> dict:
        return {c: to_string(e) for c, e in zip(COORDS, self.coeffs)}

    def __str__(self) -> str:
        parts = [f"{to_string(e)}*d{c}" for c, e in zip(COORDS, self.coeffs) if not _is_literal_zero(e)]
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"VectorField({', '.join(to_string(e) for e in self.coeffs)})"


class CartanField(VectorField):
    """A vector field annihilated by the contact form, checked on construction."""

    __slots__ = ()

    def __init__(self, *coeffs, plan: SamplePlan | None = None, check: bool = True):
        super().__init__(*coeffs)
        if check and not self.is_cartan(plan):
            raise NotCartanError(f"U(X) = {to_string(self.contact_value())} does not vanish")

    @classmethod
    def of(cls, field: VectorField, plan: SamplePlan | None = None, check: bool = True) -> "CartanField":
        if isinstance(field, CartanField):
            return field
        return cls(*field.coeffs, plan=plan, check=check)


def _unit(i: int) -> VectorField:
    return VectorField(*(ONE if k == i else ZERO for k in range(N_COORDS)))


DX, DY, DZ, DP, DQ = (_unit(i) for i in range(N_COORDS))
HAT_X = VectorField(ONE, ZERO, P, ZERO, ZERO)
HAT_Y = VectorField(ZERO, ONE, Q, ZERO, ZERO)


def field(x=0, y=0, z=0, p=0, q=0) -> VectorField:
    return VectorField(x, y, z, p, q)


def cartan_field(hat_x=0, hat_y=0, p=0, q=0) -> VectorField:
    """a d^x + b d^y + c dp + e dq on the adapted frame of the contact plane."""
    hx, hy = as_expr(hat_x), as_expr(hat_y)
    return VectorField(hx, hy, add(mul(P, hx), mul(Q, hy)), p, q)


def lie_bracket(a: VectorField, b: VectorField) -> VectorField:
    return VectorField(*(sub(a.apply(bi), b.apply(ai)) for ai, bi in zip(a.coeffs, b.coeffs)))


# ---------------------------------------------------------------- forms


def _merge_sign(a: tuple, b: tuple) -> int:
    """Sign of the permutation sorting the concatenation a + b (both sorted, disjoint)."""
    inversions = 0
    for i in a:
        for j in b:
            if i > j:
                inversions += 1
    return -1 if inversions % 2 else 1


class Form:
    """A differential form with expression coefficients, stored sparsely."""

    __slots__ = ("degree", "terms")

    def __init__(self, degree: int, terms: Mapping[tuple, Expr] | None = None):
        self.degree = degree
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or list(idx) != sorted(set(idx)):
                raise ValueError(f"bad index {idx} for a {degree}-form")
            c = as_expr(c)
            if not _is_literal_zero(c):
                clean[idx] = c
        self.terms = clean

    @classmethod
    def from_components(cls, degree: int, comps: Sequence) -> "Form":
        basis = list(combinations(range(N_COORDS), degree))
        if len(comps) != len(basis):
            raise ValueError(f"a {degree}-form needs {len(basis)} components")
        return cls(degree, dict(zip(basis, comps)))

    @staticmethod
    def basis(degree: int) -> list[tuple]:
        return list(combinations(range(N_COORDS), degree))

    def components(self) -> list[Expr]:
        return [self.terms.get(idx, ZERO) for idx in self.basis(self.degree)]

    def __getitem__(self, idx) -> Expr:
        if isinstance(idx, int):
            idx = (idx,)
        idx = tuple(idx)
        s = sorted(idx)
        if len(set(idx)) < len(idx):
            return ZERO
        sign = _perm_sign(idx)
        c = self.terms.get(tuple(s), ZERO)
        return c if sign > 0 else neg(c)

    def _combine(self, other: "Form", sign: int) -> "Form":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        out = dict(self.terms)
        for idx, c in other.terms.items():
            c = c if sign > 0 else neg(c)
            out[idx] = add(out[idx], c) if idx in out else c
        return Form(self.degree, out)

    def __add__(self, other: "Form") -> "Form":
        return self._combine(other, 1)

    def __sub__(self, other: "Form") -> "Form":
        return self._combine(other, -1)

    def __neg__(self) -> "Form":
        return Form(self.degree, {i: neg(c) for i, c in self.terms.items()})

    def scale(self, mu) -> "Form":
        mu = as_expr(mu)
        return Form(self.degree, {i: mul(mu, c) for i, c in self.terms.items()})

    def __rmul__(self, mu) -> "Form":
        return self.scale(mu)

    def wedge(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def interior(self, v: VectorField) -> "Form":
        return interior(v, self)

    def pair(self, *vs: VectorField) -> Expr:
        """Evaluate the form on ``degree`` vector fields."""
        if len(vs) != self.degree:
            raise ValueError(f"a {self.degree}-form takes {self.degree} arguments")
        f = self
        for v in vs:
            f = interior(v, f)
        return f.terms.get((), ZERO)

    def __eq__(self, other) -> bool:
        return isinstance(other, Form) and self.degree == other.degree and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.degree, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    def as_dict(self) -> dict:
        return {"".join(COORDS[i] for i in idx) or "1": to_string(c) for idx, c in sorted(self.terms.items())}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for idx, c in sorted(self.terms.items()):
            basis = "^".join("d" + COORDS[i] for i in idx)
            parts.append(f"{to_string(c)}*{basis}" if basis else to_string(c))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Form({self.degree}, {self})"


def _perm_sign(idx: Sequence[int]) -> int:
    inv = 0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                inv += 1
    return -1 if inv % 2 else 1


def OneForm(*comps) -> Form:
    if len(comps) == 1 and not isinstance(comps[0], (Expr, str, int)):
        comps = tuple(comps[0])
    return Form.from_components(1, comps)


def TwoForm(*comps) -> Form:
    if len(comps) == 1 and not isinstance(comps[0], (Expr, str, int)):
        comps = tuple(comps[0])
    return Form.from_components(2, comps)


def function_form(f) -> Form:
    return Form(0, {(): as_expr(f)})


def wedge(a: Form, b: Form) -> Form:
    out: dict[tuple, Expr] = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            if set(ia) & set(ib):
                continue
            idx = tuple(sorted(ia + ib))
            term = mul(ca, cb)
            if _merge_sign(ia, ib) < 0:
                term = neg(term)
            out[idx] = add(out[idx], term) if idx in out else term
    return Form(a.degree + b.degree, out)


def interior(v: VectorField, w: Form) -> Form:
    """Contraction v _| w, inserting v into the first slot."""
    if w.degree == 0:
        raise ValueError("cannot contract a function")
    out: dict[tuple, list] = {}
    for idx, c in w.terms.items():
        for pos, i in enumerate(idx):
            vi = v.coeffs[i]
            if _is_literal_zero(vi):
                continue
            term = mul(vi, c)
            if pos % 2:
                term = neg(term)
            rest = idx[:pos] + idx[pos + 1 :]
            out.setdefault(rest, []).append(term)
    return Form(w.degree - 1, {k: add(*ts) for k, ts in out.items()})


def exterior_d(w) -> Form:
    """Exterior derivative of a function (given as an expression) or a form."""
    if not isinstance(w, Form):
        w = function_form(w)
    out: dict[tuple, list] = {}
    for idx, c in w.terms.items():
        for j in range(N_COORDS):
            if j in idx:
                continue
            dc = diff(c, j)
            if _is_literal_zero(dc):
                continue
            new = tuple(sorted((j,) + idx))
            if _merge_sign((j,), idx) < 0:
                dc = neg(dc)
            out.setdefault(new, []).append(dc)
    return Form(w.degree + 1, {k: add(*ts) for k, ts in out.items()})


def contact_form() -> Form:
    return OneForm(neg(P), neg(Q), ONE, ZERO, ZERO)


U = contact_form()
DU = exterior_d(U)


def lie_derivative(v: VectorField, w) -> Form | Expr:
    """Lie derivative by the Cartan formula X(w) = d(X _| w) + X _| dw."""
    if not isinstance(w, Form):
        return v.apply(w)
    if w.degree == 0:
        return function_form(v.apply(w.terms.get((), ZERO)))
    return exterior_d(interior(v, w)) + interior(v, exterior_d(w))


# ------------------------------------------------------- hamiltonian fields


def _has_formal(e: Expr) -> bool:
    return any(isinstance(s, FormalPartial) for s in free_symbols(e))


def hamiltonian_vector(f) -> VectorField:
    """X_f without any checks; formal-function symbols are allowed here."""
    f = as_expr(f)
    fx, fy, fz, fp, fq = (diff(f, i) for i in range(N_COORDS))
    return cartan_field(
        hat_x=fp,
        hat_y=fq,
        p=neg(add(fx, mul(P, fz))),
        q=neg(add(fy, mul(Q, fz))),
    )


def hamiltonian_field(f, plan: SamplePlan | None = None) -> CartanField:
    """The characteristic field X_f with X_f _| dU = df - f_z U."""
    f = as_expr(f)
    if _has_formal(f):
        raise ValueError("hamiltonian_field takes a concrete function; formal symbols are not allowed")
    v = hamiltonian_vector(f)
    if v.vanishes(plan):
        raise DegenerateFieldError(f"the hamiltonian field of {to_string(f)} vanishes identically")
    return CartanField(*v.coeffs, check=False)


def field_from_oneform(sigma: Form, plan: SamplePlan | None = None) -> CartanField:
    """The Cartan field X with X _| dU = sigma + lambda U, lambda = -sigma(d/dz)."""
    if sigma.degree != 1:
        raise ValueError("field_from_oneform needs a 1-form")
    sx, sy, sz, sp, sq = sigma.components()
    v = cartan_field(
        hat_x=sp,
        hat_y=sq,
        p=neg(add(sx, mul(P, sz))),
        q=neg(add(sy, mul(Q, sz))),
    )
    if v.vanishes(plan):
        raise DegenerateFieldError("the 1-form is proportional to U; its field vanishes")
    return CartanField(*v.coeffs, check=False)


def involution(f, g, plan: SamplePlan | None = None) -> bool:
    """X_f(g) = 0, equivalently X_g(f) = 0."""
    from .symexpr import is_zero

    return is_zero(hamiltonian_vector(f).apply(g), plan or SamplePlan())


# ------------------------------------------------------------------ type


def pointwise_ranks(rows: Sequence[Sequence[Expr]], plan: SamplePlan):
    """Rank of a matrix of expressions at each sample point: [(point, rank)]."""
    flat = [e for r in rows for e in r]
    width = len(rows[0]) if rows else 0
    out = []
    for pt, vals, scales in sample(flat, plan):
        mat = []
        for k in range(len(rows)):
            row = []
            for j in range(width):
                v, s = vals[k * width + j], scales[k * width + j]
                row.append(0 if value_is_zero(v, s, plan) else v)
            mat.append(row)
        out.append((pt, matrix_rank(mat, plan.eps_rank, plan.exact)))
    return out


def constant_rank(rows: Sequence[Sequence[Expr]], plan: SamplePlan, what: str) -> int:
    samples = pointwise_ranks(rows, plan)
    ranks = [r for _, r in samples]
    if len(set(ranks)) != 1:
        raise NonConstantRankError(what, ranks, [pt for pt, _ in samples])
    return ranks[0]


def iterated_lie(v: VectorField, w: Form, n: int) -> list[Form]:
    out = [w]
    for _ in range(n):
        out.append(lie_derivative(v, out[-1]))
    return out


def cartan_type(v: VectorField, plan: SamplePlan | None = None, form: Form | None = None) -> int:
    """Rank of {U, X(U), X^2(U), X^3(U)}, unanimous across the samples.

    ``form`` lets a caller replace U by a multiple of it.
    """
    plan = plan or SamplePlan()
    v = CartanField.of(v, plan)
    if v.vanishes(plan):
        raise DegenerateFieldError("cartan_type needs a field that is not identically zero")
    w = form if form is not None else contact_form()
    seq = iterated_lie(v, w, 3)
    t = constant_rank([f.components() for f in seq], plan, "the system U, X(U), X^2(U), X^3(U)")
    if t < 2:
        raise InconsistencyError(f"type {t} found; X(U) proportional to U is impossible for a Cartan field")
    return t


def contact_volume() -> Form:
    """U ^ dU ^ dU, a nowhere-vanishing 5-form."""
    return wedge(wedge(U, DU), DU)

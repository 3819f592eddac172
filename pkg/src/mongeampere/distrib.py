"""Subdistributions of the contact plane: rank, derived flag, complements.

Every decision is made on sampled values. Ranks must agree at all sample
points; disagreement means the input leaves the constant-rank regime and is
reported, never averaged away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .contact import DU, N_COORDS, U, VectorField, constant_rank, lie_bracket, pointwise_ranks
from .errors import EvaluationError, NonConstantRankError, PivotError
from .linalg import independent_rows
from .linalg import rank as matrix_rank
from .symexpr import ONE, ZERO, Expr, SamplePlan, add, all_zero, div, mul, neg, sample, sub, value_is_zero


class Distribution:
    """An ordered list of generating vector fields.

    Ranks are cached per plan. Generators may be dependent on input;
    :func:`derived` and :meth:`pruned` return independent generating sets.
    """

    def __init__(self, generators: Iterable[VectorField]):
        gens = list(generators)
        if not gens:
            raise ValueError("a distribution needs at least one generator")
        self.generators = gens
        self._rank: dict = {}

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i: int) -> VectorField:
        return self.generators[i]

    def rank(self, plan: SamplePlan | None = None) -> int:
        plan = plan or SamplePlan()
        if plan not in self._rank:
            self._rank[plan] = constant_rank([g.coeffs for g in self.generators], plan, "distribution")
        return self._rank[plan]

    def pruned(self, plan: SamplePlan | None = None) -> "Distribution":
        plan = plan or SamplePlan()
        keep = _greedy_keep(self.generators, plan, "distribution")
        out = Distribution([self.generators[i] for i in keep])
        out._rank[plan] = len(keep)
        return out

    def as_list(self) -> list[dict]:
        return [g.as_dict() for g in self.generators]

    def __repr__(self) -> str:
        return "Distribution<" + ", ".join(str(g) for g in self.generators) + ">"


@dataclass(frozen=True)
class Flag:
    d: Distribution
    d1: Distribution
    d2: Distribution
    dims: tuple


def _greedy_keep(fields: Sequence[VectorField], plan: SamplePlan, what: str) -> list[int]:
    """Greedy independent subset in list order, identical at every sample."""
    flat = [c for f in fields for c in f.coeffs]
    rows_per_point = []
    pts = []
    for pt, vals, scales in sample(flat, plan):
        rows = []
        for k in range(len(fields)):
            row = []
            for j in range(N_COORDS):
                v, s = vals[k * N_COORDS + j], scales[k * N_COORDS + j]
                row.append(0 if value_is_zero(v, s, plan) else v)
            rows.append(row)
        rows_per_point.append(rows)
        pts.append(pt)
    keeps = [independent_rows(rows, plan.eps_rank, plan.exact) for rows in rows_per_point]
    sizes = [len(k) for k in keeps]
    if len(set(sizes)) != 1:
        raise NonConstantRankError(what, sizes, pts)
    keep = keeps[0]
    for rows, pt in zip(rows_per_point, pts):
        sub_rank = matrix_rank([rows[i] for i in keep], plan.eps_rank, plan.exact)
        if sub_rank != len(keep):
            raise NonConstantRankError(f"pruned generators of {what}", [sub_rank, len(keep)], [pt, pts[0]])
    return keep


def rank(D: Distribution, plan: SamplePlan | None = None) -> int:
    return D.rank(plan)


def derived(D: Distribution, plan: SamplePlan | None = None) -> Distribution:
    """D + [D, D], pruned with original generators first, then brackets in pair order."""
    plan = plan or SamplePlan()
    gens = D.generators
    cands = list(gens)
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            cands.append(lie_bracket(gens[i], gens[j]))
    keep = _greedy_keep(cands, plan, "derived distribution")
    out = Distribution([cands[i] for i in keep])
    out._rank[plan] = len(keep)
    return out


def flag(D: Distribution, plan: SamplePlan | None = None) -> Flag:
    plan = plan or SamplePlan()
    d0 = D.pruned(plan)
    d1 = derived(d0, plan)
    d2 = derived(d1, plan)
    return Flag(d0, d1, d2, (d0.rank(plan), d1.rank(plan), d2.rank(plan)))


def is_integrable(D: Distribution, plan: SamplePlan | None = None) -> bool:
    """Frobenius: the derived distribution has the same rank."""
    plan = plan or SamplePlan()
    return derived(D, plan).rank(plan) == D.rank(plan)


def is_lagrangian(D: Distribution, plan: SamplePlan | None = None) -> bool:
    """Rank 2, inside the contact plane, and dU-isotropic."""
    plan = plan or SamplePlan()
    if D.rank(plan) != 2:
        return False
    g = D.pruned(plan).generators
    checks = [U.pair(X) for X in g]
    checks += [DU.pair(g[i], g[j]) for i in range(len(g)) for j in range(i + 1, len(g))]
    return all_zero(checks, plan)


def span_contains(D: Distribution, X: VectorField, plan: SamplePlan | None = None) -> bool:
    plan = plan or SamplePlan()
    base = D.rank(plan)
    joint = constant_rank([g.coeffs for g in D.generators] + [X.coeffs], plan, "distribution with candidate")
    return joint == base


def same_span(D1: Distribution, D2: Distribution, plan: SamplePlan | None = None) -> bool:
    plan = plan or SamplePlan()
    r1, r2 = D1.rank(plan), D2.rank(plan)
    if r1 != r2:
        return False
    joint = constant_rank([g.coeffs for g in D1.generators + D2.generators], plan, "joint span")
    return joint == r1


def intersection_dim(D1: Distribution, D2: Distribution, plan: SamplePlan | None = None) -> int:
    plan = plan or SamplePlan()
    joint = constant_rank([g.coeffs for g in D1.generators + D2.generators], plan, "joint span")
    return D1.rank(plan) + D2.rank(plan) - joint


def _base_value(ev, e: Expr):
    try:
        return ev.with_scale(e)
    except EvaluationError:
        return None


def solve_linear_system(rows: Sequence[Sequence[Expr]], plan: SamplePlan) -> list[VectorField]:
    """Basis of {v : row . v = 0 for every row} by symbolic elimination.

    The rank comes from the samples first; pivots are then picked by largest
    magnitude at the base point, so no division is by an expression that
    vanishes there.
    """
    target = constant_rank(rows, plan, "linear system")
    m = [list(r) for r in rows]
    ncols = len(m[0])
    pivots: list[tuple[int, int]] = []  # (row, col) in reduced rows
    used_rows: set = set()
    for _ in range(target):
        ev = plan.evaluator(plan.base_point)
        best = None
        for i in range(len(m)):
            if i in used_rows:
                continue
            for c in range(ncols):
                if any(c == pc for _, pc in pivots):
                    continue
                got = _base_value(ev, m[i][c])
                if got is None:
                    continue
                v, s = got
                if value_is_zero(v, s, plan):
                    continue
                if best is None or abs(v) > best[0]:
                    best = (abs(v), i, c)
        if best is None:
            raise PivotError(
                "every pivot candidate vanishes at the base point; move the base point"
            )
        _, i, c = best
        piv = m[i][c]
        m[i] = [ONE if k == c else div(e, piv) for k, e in enumerate(m[i])]
        for k in range(len(m)):
            if k == i:
                continue
            factor = m[k][c]
            if factor == ZERO:
                continue
            m[k] = [ZERO if j == c else sub(m[k][j], mul(factor, m[i][j])) for j in range(ncols)]
        pivots.append((i, c))
        used_rows.add(i)
    pivot_cols = {c: i for i, c in pivots}
    out = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        comps = [ZERO] * ncols
        comps[f] = ONE
        for c, i in pivot_cols.items():
            comps[c] = neg(m[i][f])
        out.append(VectorField(*comps))
    return out


def orthogonal_complement(D: Distribution, plan: SamplePlan | None = None) -> Distribution:
    """{U = 0} together with {X_i _| dU = 0} for the generators X_i."""
    plan = plan or SamplePlan()
    rows = [U.components()] + [DU.interior(X).components() for X in D.generators]
    sol = solve_linear_system(rows, plan)
    if not sol:
        raise PivotError("the complement is trivial")
    out = Distribution(sol)
    out._rank[plan] = len(sol)
    return out

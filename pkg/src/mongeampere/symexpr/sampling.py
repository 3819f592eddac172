"""Seeded sample plans and the probabilistic zero test.

Every question of the form "does this expression vanish" or "what is the
rank here" is answered by evaluating at a few points drawn from a box around
a base point. Points are rationals with denominator 2**20, so the same plan
serves exact and floating evaluation; the stream restarts from the seed on
every call, which makes each answer reproducible on its own.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from ..errors import EvaluationError, SamplingError
from .evaluate import Evaluator, Point, Value
from .nodes import Expr, as_expr

DEFAULT_BASE = (Fraction(1, 3), Fraction(1, 5), Fraction(1, 7), Fraction(1, 11), Fraction(1, 13))
DEFAULT_HALF_WIDTH = Fraction(1, 2)
_GRID = 2**20


def _as_fraction(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


@dataclass(frozen=True)
class SamplePlan:
    """Where and how densely expressions are probed.

    ``bindings`` fixes numeric values for named parameters; it is part of the
    plan because every evaluation needs it.
    """

    base: tuple = DEFAULT_BASE
    half_width: tuple = (DEFAULT_HALF_WIDTH,) * 5
    samples: int = 8
    seed: int = 42
    eps_zero: float = 1e-9
    eps_rank: float = 1e-8
    exact: bool = False
    bindings: tuple = field(default=())

    def __post_init__(self):
        base = tuple(_as_fraction(c) for c in self.base)
        hw = self.half_width
        if not isinstance(hw, (tuple, list)):
            hw = (hw,) * 5
        hw = tuple(_as_fraction(c) for c in hw)
        if len(base) != 5 or len(hw) != 5:
            raise ValueError("base point and half-width need five entries")
        if any(h <= 0 for h in hw):
            raise ValueError("box half-widths must be positive")
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ValueError("sample count must be a positive integer")
        if not (self.eps_zero > 0 and self.eps_rank > 0):
            raise ValueError("tolerances must be positive")
        binds = self.bindings
        if isinstance(binds, Mapping):
            binds = binds.items()
        binds = tuple(sorted((str(k), _as_fraction(v)) for k, v in binds))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "half_width", hw)
        object.__setattr__(self, "bindings", binds)

    def replace(self, **changes) -> "SamplePlan":
        from dataclasses import replace

        return replace(self, **changes)

    @property
    def binding_map(self) -> dict:
        return dict(self.bindings)

    @property
    def base_point(self) -> Point:
        return Point(*self.base)

    def points(self) -> Iterator[Point]:
        """The endless deterministic point stream of this plan."""
        rng = random.Random(self.seed)
        while True:
            coords = []
            for c, h in zip(self.base, self.half_width):
                u = Fraction(rng.randrange(_GRID + 1), _GRID)
                coords.append(c + h * (2 * u - 1))
            yield Point(*coords)

    def evaluator(self, pt: Sequence) -> Evaluator:
        return Evaluator(pt, self.binding_map, exact=self.exact)


def sample(exprs: Sequence[Expr], plan: SamplePlan, count: int | None = None):
    """Evaluate ``exprs`` at ``count`` (default ``plan.samples``) good points.

    Returns a list of ``(point, values, scales)``. A point where any
    expression fails to evaluate is replaced by the next one in the stream;
    after ten times ``count`` replacements the box is declared singular.
    """
    exprs = [as_expr(e) for e in exprs]
    m = plan.samples if count is None else count
    out = []
    redraws = 0
    stream = plan.points()
    while len(out) < m:
        pt = next(stream)
        ev = plan.evaluator(pt)
        try:
            pairs = [ev.with_scale(e) for e in exprs]
        except EvaluationError:
            redraws += 1
            if redraws > 10 * m:
                raise SamplingError(
                    f"no usable sample points after {redraws} redraws; the input is singular on the box"
                ) from None
            continue
        out.append((pt, [v for v, _ in pairs], [s for _, s in pairs]))
    return out


def value_is_zero(v: Value, scale: float, plan: SamplePlan) -> bool:
    if plan.exact:
        return v == 0
    return abs(v) <= plan.eps_zero * (1.0 + scale)


def is_zero(e, plan: SamplePlan | None = None) -> bool:
    """Probabilistic identity test: ``e`` vanishes at every sample point."""
    plan = plan or SamplePlan()
    return all(value_is_zero(vs[0], ss[0], plan) for _, vs, ss in sample([e], plan))


def all_zero(exprs: Sequence, plan: SamplePlan | None = None) -> bool:
    """``is_zero`` for several expressions against one shared set of points."""
    plan = plan or SamplePlan()
    exprs = list(exprs)
    if not exprs:
        return True
    for _, vs, ss in sample(exprs, plan):
        if not all(value_is_zero(v, s, plan) for v, s in zip(vs, ss)):
            return False
    return True


def zero_pattern(e, plan: SamplePlan | None = None) -> list[bool]:
    """Per-sample vanishing of ``e``; used to detect mixed degeneracy."""
    plan = plan or SamplePlan()
    return [value_is_zero(vs[0], ss[0], plan) for _, vs, ss in sample([e], plan)]

"""Numeric evaluation of expression trees.

Two numeric kinds are supported: exact ``Fraction`` arithmetic (rational
functions at rational points) and IEEE doubles. The evaluator memoizes by
node identity, so shared subtrees of a DAG are computed once per point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence, Union

from ..errors import DomainError, EvaluationError, ExactModeError, UnboundSymbolError
from .nodes import Add, Apply, Const, Div, Expr, FormalPartial, Mul, Pow, Symbol, children

Value = Union[Fraction, float]


class Point(NamedTuple):
    x: Value
    y: Value
    z: Value
    p: Value
    q: Value

    def as_float(self) -> "Point":
        return Point(*(float(c) for c in self))

    def as_exact(self) -> "Point":
        return Point(*(Fraction(c) for c in self))


_FLOAT_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
}


class Evaluator:
    """Evaluates many expressions at one point, sharing a memo table.

    ``scale`` records the largest magnitude met at any node evaluated so far;
    :meth:`with_scale` gives the same figure restricted to one subtree. The
    zero test uses it as the yardstick for cancellation error.
    """

    def __init__(self, point: Sequence, bindings: Mapping[str, Value] | None = None, exact: bool = False):
        if len(point) != 5:
            raise ValueError("a point needs exactly five coordinates")
        self.exact = exact
        if exact:
            self.coords = tuple(Fraction(c) for c in point)
        else:
            self.coords = tuple(float(c) for c in point)
        self.bindings = {}
        for k, v in (bindings or {}).items():
            self.bindings[k] = Fraction(v) if exact else float(v)
        # id -> (node, value, subtree scale); holding the node keeps its id from being recycled
        self.memo: dict[int, tuple] = {}
        self.scale = 0.0

    def __call__(self, e: Expr) -> Value:
        return self._eval(e)

    def with_scale(self, e: Expr) -> tuple[Value, float]:
        """Value of ``e`` and the largest magnitude over its subterms."""
        self._eval(e)
        hit = self.memo[id(e)]
        return hit[1], hit[2]

    def _note(self, v: Value) -> Value:
        a = abs(v)
        if a > self.scale:
            self.scale = float(a)
        return v

    def _eval(self, e: Expr) -> Value:
        key = id(e)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        v = self._compute(e)
        if not self.exact:
            if not math.isfinite(v):
                raise EvaluationError(f"non-finite value {v} while evaluating")
        s = float(abs(v))
        for c in children(e):
            cs = self.memo[id(c)][2]
            if cs > s:
                s = cs
        self.memo[key] = (e, v, s)
        self._note(v)
        return v

    def _compute(self, e: Expr) -> Value:
        if isinstance(e, Const):
            return e.value if self.exact else e.fvalue
        if isinstance(e, Symbol):
            if e.index is not None:
                return self.coords[e.index]
            return self._binding(e.name)
        if isinstance(e, FormalPartial):
            return self._binding(e.name)
        if isinstance(e, Add):
            total = 0
            for t in e.terms:
                total += self._eval(t)
            return total
        if isinstance(e, Mul):
            prod = e.coeff if self.exact else float(e.coeff)
            for f in e.factors:
                prod *= self._eval(f)
            return prod
        if isinstance(e, Div):
            num = self._eval(e.num)
            den = self._eval(e.den)
            if den == 0:
                raise DomainError("division by zero")
            return num / den
        if isinstance(e, Pow):
            b = self._eval(e.base)
            if b == 0 and e.exp < 0:
                raise DomainError("division by zero in negative power")
            try:
                return b**e.exp
            except OverflowError as exc:
                raise EvaluationError("overflow in power") from exc
        if isinstance(e, Apply):
            return self._apply(e.func, self._eval(e.arg))
        raise TypeError(type(e).__name__)

    def _binding(self, name: str) -> Value:
        try:
            return self.bindings[name]
        except KeyError:
            raise UnboundSymbolError(f"symbol {name!r} is not bound") from None

    def _apply(self, func: str, a: Value) -> Value:
        if func == "sqrt" and a < 0:
            raise DomainError(f"sqrt of negative value {float(a)}")
        if func == "log" and a <= 0:
            raise DomainError(f"log of non-positive value {float(a)}")
        if self.exact:
            if func == "sqrt":
                r = _exact_sqrt(a)
                if r is not None:
                    return r
            raise ExactModeError(f"{func} has no exact rational value here")
        try:
            if func == "sqrt":
                return math.sqrt(a)
            if func == "log":
                return math.log(a)
            return _FLOAT_FUNCS[func](a)
        except OverflowError as exc:
            raise EvaluationError(f"overflow in {func}") from exc


def _exact_sqrt(v: Fraction):
    rn, rd = math.isqrt(v.numerator), math.isqrt(v.denominator)
    if rn * rn == v.numerator and rd * rd == v.denominator:
        return Fraction(rn, rd)
    return None


def evaluate(e: Expr, point: Sequence, bindings: Mapping[str, Value] | None = None, exact: bool | None = None) -> Value:
    """Evaluate ``e`` at ``point``.

    With ``exact=None`` the numeric kind follows the point: an all-``Fraction``
    (or int) point gives exact arithmetic whenever the tree has no
    transcendental function, doubles otherwise.
    """
    if exact is None:
        from .nodes import is_rational_function

        exact = all(isinstance(c, (int, Fraction)) for c in point) and is_rational_function(e)
    return Evaluator(point, bindings, exact)(e)

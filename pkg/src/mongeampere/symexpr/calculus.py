"""Symbolic differentiation and substitution."""

from __future__ import annotations

from typing import Mapping, Union

from ..errors import FormalOrderError
from .nodes import (
    COORD_INDEX,
    COORDS,
    ONE,
    ZERO,
    Add,
    Apply,
    Const,
    Div,
    Expr,
    FormalPartial,
    Mul,
    Pow,
    Symbol,
    add,
    apply,
    as_expr,
    cos,
    div,
    mul,
    neg,
    power,
    sin,
    sqrt,
    sub,
)

Coordinate = Union[int, str]


def coordinate_index(v: Coordinate) -> int:
    if isinstance(v, Symbol) and v.is_coordinate:
        return v.index
    if isinstance(v, str):
        try:
            return COORD_INDEX[v]
        except KeyError:
            raise ValueError(f"{v!r} is not a coordinate; expected one of {COORDS}") from None
    if isinstance(v, int) and 0 <= v < len(COORDS):
        return v
    raise ValueError(f"invalid coordinate {v!r}")


def diff(e: Expr, v: Coordinate) -> Expr:
    """Partial derivative of ``e`` with respect to coordinate ``v``.

    Results are memoized on the node, so repeated differentiation of shared
    subtrees (as happens in iterated Lie derivatives) stays cheap.
    """
    return _diff(e, coordinate_index(v))


def _diff(e: Expr, i: int) -> Expr:
    if not e.mask >> i & 1:
        return ZERO
    cache = e._dcache
    if cache is None:
        cache = e._dcache = [None] * len(COORDS)
    hit = cache[i]
    if hit is not None:
        return hit
    out = _diff_rule(e, i)
    cache[i] = out
    return out


def _diff_rule(e: Expr, i: int) -> Expr:
    if isinstance(e, Symbol):
        return ONE if e.index == i else ZERO
    if isinstance(e, FormalPartial):
        if e.order >= 2:
            raise FormalOrderError(
                f"differentiating {e.name} by {COORDS[i]} would need a third-order partial"
            )
        return FormalPartial(e.function, e.index + (i,))
    if isinstance(e, Add):
        return add(*(_diff(t, i) for t in e.terms))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for k, f in enumerate(fs):
            df = _diff(f, i)
            if isinstance(df, Const) and df.value == 0:
                continue
            parts.append(mul(Const(e.coeff), *fs[:k], df, *fs[k + 1 :]))
        return add(*parts)
    if isinstance(e, Div):
        a, b = e.num, e.den
        da, db = _diff(a, i), _diff(b, i)
        if isinstance(db, Const) and db.value == 0:
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(e, Pow):
        return mul(Const(e.exp), power(e.base, e.exp - 1), _diff(e.base, i))
    if isinstance(e, Apply):
        u = e.arg
        du = _diff(u, i)
        if e.func == "sin":
            return mul(cos(u), du)
        if e.func == "cos":
            return neg(mul(sin(u), du))
        if e.func == "exp":
            return mul(e, du)
        if e.func == "log":
            return div(du, u)
        if e.func == "sqrt":
            return div(du, mul(Const(2), sqrt(u)))
    raise TypeError(f"cannot differentiate node {type(e).__name__}")


def _lookup_key(k) -> Expr:
    if isinstance(k, Expr):
        return k
    if isinstance(k, str):
        from .parser import parse_identifier

        return parse_identifier(k)
    raise TypeError(f"invalid substitution key {k!r}")


def substitute(e: Expr, mapping: Mapping) -> Expr:
    """Simultaneously replace symbols (coordinates, parameters, formal partials).

    Keys may be symbol nodes or their names (``"x"``, ``"k"``, ``"f_xy"``).
    The tree is rebuilt through the simplifying constructors.
    """
    table = {_lookup_key(k): as_expr(v) for k, v in mapping.items()}
    memo: dict[int, Expr] = {}

    def go(n: Expr) -> Expr:
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        if isinstance(n, (Symbol, FormalPartial)):
            out = table.get(n, n)
        elif isinstance(n, Const):
            out = n
        elif isinstance(n, Add):
            out = add(*(go(t) for t in n.terms))
        elif isinstance(n, Mul):
            out = mul(Const(n.coeff), *(go(f) for f in n.factors))
        elif isinstance(n, Div):
            out = div(go(n.num), go(n.den))
        elif isinstance(n, Pow):
            out = power(go(n.base), n.exp)
        elif isinstance(n, Apply):
            out = apply(n.func, go(n.arg))
        else:
            raise TypeError(type(n).__name__)
        memo[id(n)] = out
        return out

    return go(e)

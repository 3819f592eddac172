"""Canonical printer: fully parenthesized infix, ``^`` for powers.

The output re-parses to a structurally equal tree.
"""

from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Apply, Const, Div, Expr, FormalPartial, Mul, Pow, Symbol


def _const(v: Fraction) -> str:
    if v.denominator == 1:
        s = str(v.numerator)
    else:
        s = f"{abs(v.numerator)}/{v.denominator}"
        if v < 0:
            s = "-" + s
        return f"({s})"
    return f"({s})" if v < 0 else s


def _positive_mul(coeff: Fraction, factors: tuple, memo) -> str:
    parts = [] if coeff == 1 else [_const(coeff)]
    parts.extend(_str(f, memo) for f in factors)
    if len(parts) == 1:
        return parts[0]
    return "(" + " * ".join(parts) + ")"


def _is_negative(e: Expr) -> bool:
    return (isinstance(e, Mul) and e.coeff < 0) or (isinstance(e, Const) and e.value < 0)


def _abs_str(e: Expr, memo) -> str:
    if isinstance(e, Const):
        return _const(-e.value)
    return _positive_mul(-e.coeff, e.factors, memo)


def _str(e: Expr, memo) -> str:
    hit = memo.get(id(e))
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = _const(e.value)
    elif isinstance(e, (Symbol, FormalPartial)):
        out = e.name
    elif isinstance(e, Apply):
        out = f"{e.func}({_str(e.arg, memo)})"
    elif isinstance(e, Mul):
        if e.coeff < 0:
            out = "(-" + _positive_mul(-e.coeff, e.factors, memo) + ")"
        else:
            out = _positive_mul(e.coeff, e.factors, memo)
    elif isinstance(e, Add):
        pieces = [_str(e.terms[0], memo)]
        for t in e.terms[1:]:
            if _is_negative(t):
                pieces.append(" - " + _abs_str(t, memo))
            else:
                pieces.append(" + " + _str(t, memo))
        out = "(" + "".join(pieces) + ")"
    elif isinstance(e, Div):
        out = f"({_str(e.num, memo)} / {_str(e.den, memo)})"
    elif isinstance(e, Pow):
        n = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        out = f"({_str(e.base, memo)} ^ {n})"
    else:
        raise TypeError(type(e).__name__)
    memo[id(e)] = out
    return out


def to_string(e: Expr) -> str:
    return _str(e, {})

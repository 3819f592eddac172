"""Immutable expression trees over the contact chart (x, y, z, p, q).

Nodes are built only through the constructor functions at the bottom of this
module (``add``, ``mul``, ``div``, ``power``, ``apply`` ...). They perform the
eager basic simplification the rest of the engine relies on: constant
folding, 0/1 absorption, flattening of sums and products, and merging of
structurally identical terms and factors. Nothing heavier is attempted;
deciding whether an expression vanishes is left to sampling.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

from ..errors import FormalOrderError

COORDS = ("x", "y", "z", "p", "q")
COORD_INDEX = {name: i for i, name in enumerate(COORDS)}
ALL_COORDS_MASK = (1 << len(COORDS)) - 1
FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")

Number = Union[int, Fraction]


class Expr:
    """Base class of all expression nodes.

    ``mask`` is a bitmask of the coordinates the node may depend on; it lets
    differentiation skip whole subtrees.
    """

    __slots__ = ("_hash", "mask", "_dcache")

    def _key(self) -> tuple:
        raise NotImplementedError

    def _init(self, mask: int) -> None:
        self.mask = mask
        self._hash = hash((type(self).__name__,) + self._key())
        self._dcache = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return self._hash == other._hash and self._key() == other._key()

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __hash__(self) -> int:
        return self._hash

    def depends_on(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, n: int):
        return power(self, n)

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        from .printer import to_string

        return to_string(self)

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"


class Const(Expr):
    __slots__ = ("value", "fvalue")

    def __init__(self, value: Number):
        self.value = Fraction(value)
        self.fvalue = float(self.value)
        self._init(0)

    def _key(self) -> tuple:
        return (self.value,)


class Symbol(Expr):
    """A coordinate (x, y, z, p, q) or a named parameter."""

    __slots__ = ("name", "index")

    def __init__(self, name: str):
        self.name = name
        self.index = COORD_INDEX.get(name)
        self._init(0 if self.index is None else 1 << self.index)

    @property
    def is_coordinate(self) -> bool:
        return self.index is not None

    def _key(self) -> tuple:
        return (self.name,)


class FormalPartial(Expr):
    """A partial derivative symbol of a formal function, e.g. ``f_xp``.

    ``index`` is a sorted tuple of coordinate indices of length 0, 1 or 2, so
    the symbols for (i, j) and (j, i) coincide.
    """

    __slots__ = ("function", "index")

    def __init__(self, function: str, index: Iterable[int] = ()):
        index = tuple(sorted(index))
        if len(index) > 2:
            raise FormalOrderError(
                f"partial of order {len(index)} of formal function {function!r}"
            )
        self.function = function
        self.index = index
        self._init(ALL_COORDS_MASK)

    @property
    def order(self) -> int:
        return len(self.index)

    @property
    def name(self) -> str:
        if not self.index:
            return self.function
        return self.function + "_" + "".join(COORDS[i] for i in self.index)

    def _key(self) -> tuple:
        return (self.function, self.index)


class Apply(Expr):
    __slots__ = ("func", "arg")

    def __init__(self, func: str, arg: Expr):
        self.func = func
        self.arg = arg
        self._init(arg.mask)

    def _key(self) -> tuple:
        return (self.func, self.arg)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        self.terms = terms
        mask = 0
        for t in terms:
            mask |= t.mask
        self._init(mask)

    def _key(self) -> tuple:
        return self.terms


class Mul(Expr):
    """``coeff * f1 * f2 * ...`` with a rational coefficient kept apart from the factors."""

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff: Fraction, factors: tuple):
        self.coeff = coeff
        self.factors = factors
        mask = 0
        for f in factors:
            mask |= f.mask
        self._init(mask)

    def _key(self) -> tuple:
        return (self.coeff, self.factors)


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        self.num = num
        self.den = den
        self._init(num.mask | den.mask)

    def _key(self) -> tuple:
        return (self.num, self.den)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = exp
        self._init(base.mask)

    def _key(self) -> tuple:
        return (self.base, self.exp)


ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, float):
        return Const(Fraction(value))
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def const(value: Number) -> Const:
    return Const(value)


def symbol(name: str) -> Symbol:
    return Symbol(name)


X, Y, Z, P, Q = (Symbol(name) for name in COORDS)
COORD_SYMBOLS = (X, Y, Z, P, Q)


def is_const(e: Expr, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


def _split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    if isinstance(e, Mul):
        if len(e.factors) == 1:
            return e.coeff, e.factors[0]
        if e.coeff != 1:
            return e.coeff, Mul(Fraction(1), e.factors)
    return Fraction(1), e


def add(*args: Expr) -> Expr:
    total = Fraction(0)
    terms: dict[Expr, Fraction] = {}
    stack = list(reversed(args))
    while stack:
        e = stack.pop()
        if not isinstance(e, Expr):
            e = as_expr(e)
        if isinstance(e, Add):
            stack.extend(reversed(e.terms))
        elif isinstance(e, Const):
            total += e.value
        else:
            c, key = _split_coeff(e)
            terms[key] = terms.get(key, 0) + c
    out = [mul(Const(c), key) for key, c in terms.items() if c != 0]
    if total != 0:
        out.append(Const(total))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def mul(*args: Expr) -> Expr:
    coeff = Fraction(1)
    exps: dict[Expr, int] = {}
    stack = list(reversed(args))
    while stack:
        e = stack.pop()
        if not isinstance(e, Expr):
            e = as_expr(e)
        if isinstance(e, Const):
            if e.value == 0:
                return ZERO
            coeff *= e.value
        elif isinstance(e, Mul):
            coeff *= e.coeff
            stack.extend(reversed(e.factors))
        elif isinstance(e, Pow):
            exps[e.base] = exps.get(e.base, 0) + e.exp
        else:
            exps[e] = exps.get(e, 0) + 1
    factors = []
    for base, n in exps.items():
        if n == 0:
            continue
        f = base if n == 1 else Pow(base, n)
        factors.append(f)
    if not factors:
        return Const(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    return Mul(coeff, tuple(factors))


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 0:
            return Div(a, b)
        return mul(Const(1 / b.value), a)
    if is_const(a, 0):
        return ZERO
    return Div(a, b)


def power(base: Expr, n: int) -> Expr:
    if isinstance(n, Const):
        if n.value.denominator != 1:
            raise ValueError(f"non-integer exponent {n.value}")
        n = int(n.value)
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError("exponents must be integers")
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            return Pow(base, n)
        return Const(base.value**n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    if isinstance(base, Mul):
        return mul(Const(base.coeff**n), *(power(f, n) for f in base.factors))
    return Pow(base, n)


def _exact_sqrt(v: Fraction):
    if v < 0:
        return None
    rn, rd = math.isqrt(v.numerator), math.isqrt(v.denominator)
    if rn * rn == v.numerator and rd * rd == v.denominator:
        return Fraction(rn, rd)
    return None


def apply(func: str, arg: Expr) -> Expr:
    if func == "neg":
        return neg(arg)
    if func not in FUNCTIONS:
        raise ValueError(f"unknown function {func!r}")
    if isinstance(arg, Const):
        v = arg.value
        if v == 0 and func == "sin":
            return ZERO
        if v == 0 and func in ("cos", "exp"):
            return ONE
        if v == 1 and func == "log":
            return ZERO
        if func == "sqrt":
            r = _exact_sqrt(v)
            if r is not None:
                return Const(r)
    return Apply(func, arg)


def sin(e: Expr) -> Expr:
    return apply("sin", e)


def cos(e: Expr) -> Expr:
    return apply("cos", e)


def exp(e: Expr) -> Expr:
    return apply("exp", e)


def log(e: Expr) -> Expr:
    return apply("log", e)


def sqrt(e: Expr) -> Expr:
    return apply("sqrt", e)


def iter_nodes(e: Expr):
    """Yield every distinct node (by identity) of the DAG rooted at ``e``."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(children(n))


def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Apply):
        return (e.arg,)
    return ()


def free_symbols(e: Expr) -> set:
    return {n for n in iter_nodes(e) if isinstance(n, (Symbol, FormalPartial))}


def is_rational_function(e: Expr) -> bool:
    return not any(isinstance(n, Apply) for n in iter_nodes(e))

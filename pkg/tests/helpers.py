"""Random inputs shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from mongeampere.symexpr import COORDS, Const, Symbol, add, apply, div, mul, parse, power

VARS = [Symbol(c) for c in COORDS]


def rand_coeff(rng: random.Random) -> Const:
    return Const(Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4)))


def rand_poly(rng: random.Random, degree: int = 2, terms: int = 4, variables=VARS):
    """Random polynomial of total degree at most ``degree``."""
    out = []
    for _ in range(terms):
        mono = [rand_coeff(rng)]
        for _ in range(rng.randint(0, degree)):
            mono.append(rng.choice(variables))
        out.append(mul(*mono))
    return add(*out)


def rand_nonvanishing(rng: random.Random):
    """A function bounded away from zero on every box."""
    return add(Const(1), power(rand_poly(rng, 2, 3), 2))


def rand_smooth(rng: random.Random, depth: int = 3):
    """Random expression of the full grammar, smooth and finite on the sample box."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return rng.choice(VARS)
        return rand_coeff(rng)
    k = rng.randrange(9)
    a = rand_smooth(rng, depth - 1)
    if k == 0:
        return add(a, rand_smooth(rng, depth - 1))
    if k == 1:
        return add(a, mul(Const(-1), rand_smooth(rng, depth - 1)))
    if k == 2:
        return mul(a, rand_smooth(rng, depth - 1))
    if k == 3:
        return div(a, add(Const(2), power(rand_smooth(rng, depth - 1), 2)))
    if k == 4:
        return power(a, rng.randint(2, 3))
    if k == 5:
        return apply(rng.choice(["sin", "cos"]), a)
    if k == 6:
        return apply("exp", div(a, add(Const(1), power(a, 2))))
    if k == 7:
        return apply("log", add(Const(1), power(a, 2)))
    return apply("sqrt", add(Const(1), power(a, 2)))


FIXTURE_CLASS1 = dict(a="0", b="0")
FIXTURE_CLASS2 = dict(a="0", b="p")
FIXTURE_CLASS3 = dict(a="z", b="p")
FIXTURE_GENERIC = dict(a="q", b="0")
GENUINE_GENERIC = dict(a="q", b="p")


def p(text: str):
    return parse(text)

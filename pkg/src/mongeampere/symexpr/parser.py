"""Recursive-descent parser for the expression grammar.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' exponent)?
    exponent:= ('-' | '+')? power            # must fold to an integer
    primary := number | identifier | func '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-p^2`` is ``-(p^2)``. Implicit
multiplication is rejected. Numbers are integers or decimals (``1.5``,
``2e-3``) and are read exactly as rationals.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from ..errors import ExprSyntaxError, UnknownIdentifierError
from .nodes import (
    COORD_INDEX,
    COORDS,
    FUNCTIONS,
    Const,
    Expr,
    FormalPartial,
    Symbol,
    add,
    apply,
    div,
    mul,
    neg,
    power,
    sub,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)
RESERVED = frozenset(COORDS) | frozenset(FUNCTIONS) | {"neg"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items = []  # (kind, value, char offset)
        pos = 0
        n = len(text)
        while True:
            while pos < n and text[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", self.byte(pos))
            kind = m.lastgroup
            start = m.start(kind)
            self.items.append((kind, m.group(kind), start))
            pos = m.end()
        self.items.append(("end", "", n))
        self.i = 0

    def byte(self, char_offset: int) -> int:
        return len(self.text[:char_offset].encode("utf-8"))

    def peek(self):
        return self.items[self.i]

    def next(self):
        tok = self.items[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None) -> ExprSyntaxError:
        tok = tok or self.peek()
        return ExprSyntaxError(message, self.byte(tok[2]))


def _formal_symbol(name: str, functions: frozenset):
    if name in functions:
        return FormalPartial(name)
    head, sep, tail = name.rpartition("_")
    if sep and head in functions and 1 <= len(tail) <= 2 and all(c in COORD_INDEX for c in tail):
        return FormalPartial(head, [COORD_INDEX[c] for c in tail])
    return None


class Parser:
    def __init__(self, text: str, params: frozenset, functions: frozenset):
        self.tokens = _Tokens(text)
        self.params = params
        self.functions = functions

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.tokens.peek()
        if tok[0] != "end":
            raise self.tokens.error(f"unexpected token {tok[1]!r}")
        return e

    def _is_op(self, value: str) -> bool:
        tok = self.tokens.peek()
        return tok[0] == "op" and tok[1] == value

    def expr(self) -> Expr:
        e = self.term()
        while self._is_op("+") or self._is_op("-"):
            op = self.tokens.next()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self._is_op("*") or self._is_op("/"):
            op = self.tokens.next()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self._is_op("-"):
            self.tokens.next()
            return neg(self.unary())
        if self._is_op("+"):
            self.tokens.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self._is_op("^"):
            self.tokens.next()
            tok = self.tokens.peek()
            sign = 1
            if self._is_op("-") or self._is_op("+"):
                sign = -1 if self.tokens.next()[1] == "-" else 1
            n = self.power()
            if not isinstance(n, Const) or n.value.denominator != 1:
                raise self.tokens.error("exponent must be an integer constant", tok)
            return power(base, sign * int(n.value))
        return base

    def primary(self) -> Expr:
        tok = self.tokens.next()
        kind, value, _ = tok
        if kind == "num":
            return Const(Fraction(value))
        if kind == "ident":
            if value in FUNCTIONS:
                if not self._is_op("("):
                    raise self.tokens.error(f"function {value!r} needs an argument in parentheses")
                self.tokens.next()
                arg = self.expr()
                self._expect(")")
                return apply(value, arg)
            if value in COORD_INDEX:
                return Symbol(value)
            if value in self.params:
                return Symbol(value)
            formal = _formal_symbol(value, self.functions)
            if formal is not None:
                return formal
            raise UnknownIdentifierError(f"unknown identifier {value!r}", self.tokens.byte(tok[2]))
        if kind == "op" and value == "(":
            e = self.expr()
            self._expect(")")
            return e
        if kind == "end":
            raise self.tokens.error("unexpected end of input", tok)
        raise self.tokens.error(f"unexpected token {value!r}", tok)

    def _expect(self, value: str) -> None:
        tok = self.tokens.peek()
        if tok[0] != "op" or tok[1] != value:
            raise self.tokens.error(f"expected {value!r}")
        self.tokens.next()


def parse(text: str, params: Iterable[str] = (), functions: Iterable[str] = ()) -> Expr:
    """Parse ``text`` into an expression.

    ``params`` declares named parameter symbols, ``functions`` declares
    formal functions whose partials may then be written ``f``, ``f_x``,
    ``f_xp`` and so on.
    """
    params = frozenset(params)
    functions = frozenset(functions)
    clash = (params | functions) & RESERVED
    if clash:
        raise ValueError(f"reserved names cannot be declared: {sorted(clash)}")
    return Parser(text, params, functions).parse()


def parse_identifier(name: str) -> Expr:
    """Resolve a bare symbol name used as a substitution key."""
    if name in COORD_INDEX:
        return Symbol(name)
    head, sep, tail = name.rpartition("_")
    if sep and head and 1 <= len(tail) <= 2 and all(c in COORD_INDEX for c in tail):
        return FormalPartial(head, [COORD_INDEX[c] for c in tail])
    return Symbol(name)

"""Expression kernel over the contact coordinates (x, y, z, p, q)."""

from .calculus import coordinate_index, diff, substitute
from .evaluate import Evaluator, Point, evaluate
from .nodes import (
    COORD_SYMBOLS,
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
    P,
    Pow,
    Q,
    Symbol,
    X,
    Y,
    Z,
    add,
    apply,
    as_expr,
    cos,
    div,
    exp,
    free_symbols,
    is_const,
    is_rational_function,
    log,
    mul,
    neg,
    power,
    sin,
    sqrt,
    sub,
)
from .parser import parse
from .printer import to_string
from .sampling import SamplePlan, all_zero, is_zero, sample, value_is_zero, zero_pattern

__all__ = [
    "COORDS", "COORD_SYMBOLS", "ONE", "ZERO", "X", "Y", "Z", "P", "Q",
    "Expr", "Const", "Symbol", "FormalPartial", "Apply", "Add", "Mul", "Div", "Pow",
    "add", "sub", "mul", "div", "neg", "power", "apply", "sin", "cos", "exp", "log", "sqrt",
    "as_expr", "is_const", "free_symbols", "is_rational_function",
    "parse", "to_string", "diff", "substitute", "coordinate_index",
    "Point", "Evaluator", "evaluate",
    "SamplePlan", "sample", "is_zero", "all_zero", "zero_pattern", "value_is_zero",
]

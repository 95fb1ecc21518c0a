"""Symbolic expressions in one variable ``t`` with numeric-backed leaves."""

from .calculus import derivative, derivatives, differentiate, substitute
from .core import (ONE, ZERO, MINUS_ONE, T, Expr, absolute, add, as_expr, atan,
                   const, cos, div, exp, func, leaf_call, ln, mul, neg, normalize,
                   power, sin, sqrt, sub, tan)
from .evaluation import (Program, equiv_numeric, evaluate, evaluate_many,
                         is_zero_numeric, max_rel_diff, sample, sup_norm)
from .interval import Interval, as_interval
from .leaf import NumericLeaf
from .printer import LeafNames, serialize

__all__ = [
    "Expr", "T", "ONE", "ZERO", "MINUS_ONE", "const", "as_expr", "add", "sub", "mul",
    "div", "neg", "power", "sqrt", "func", "exp", "ln", "sin", "cos", "tan", "atan",
    "absolute", "leaf_call", "normalize", "derivative", "derivatives", "differentiate",
    "substitute", "evaluate", "evaluate_many", "Program", "equiv_numeric",
    "max_rel_diff", "sample", "sup_norm", "is_zero_numeric", "Interval", "as_interval",
    "NumericLeaf", "serialize", "LeafNames",
]

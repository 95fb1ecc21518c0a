"""Numeric-backed functions that live inside expressions.

A ``NumericLeaf`` stands for a function known only numerically: a solution of
an initial value problem, a quadrature, or the inverse of a monotone
function.  It stores values for derivative orders ``0 .. stored-1`` (read off
the solver state or its interpolant) and a *relation*, an expression for the
derivative of order ``stored`` in terms of ``t`` and the lower stored
derivatives.  Higher derivatives are obtained by differentiating the relation
symbolically, so they inherit the accuracy of the stored state instead of the
much weaker accuracy of a differentiated interpolant.
"""

from __future__ import annotations

import itertools
import threading

import numpy as np

from ..errors import DerivativeOrderError, OutOfIntervalError
from .core import Expr, leaf_call, stable_name_hash
from .interval import Interval, as_interval

_counter = itertools.count(1)
_counter_lock = threading.Lock()

# evaluation tolerance at interval ends, relative to the width
ENDPOINT_SLACK = 1e-9


def fresh_name(prefix: str) -> str:
    with _counter_lock:
        return f"{prefix}{next(_counter)}"


class NumericLeaf:
    def __init__(self, prefix: str, interval, stored: int, evaluator, *,
                 order: int | None = None, provenance=None, tolerance: float = 1e-10):
        if stored < 1:
            raise ValueError("a leaf stores at least its values")
        self.prefix = prefix
        self.name = fresh_name(prefix)
        self.stable_hash = stable_name_hash(self.name)
        self.interval: Interval = as_interval(interval)
        self.stored = stored
        self.order = stored + 8 if order is None else order
        self.provenance = dict(provenance or {})
        self.tolerance = tolerance
        self._evaluator = evaluator
        self._relation: Expr | None = None
        self._derivs = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"NumericLeaf({self.name}, {self.interval}, stored={self.stored})"

    def set_relation(self, relation: Expr):
        """Expression for the derivative of order ``stored``."""
        self._relation = relation
        self._derivs = {self.stored: relation}

    def __call__(self, arg=None, k: int = 0) -> Expr:
        return leaf_call(self, k, arg)

    def check_order(self, k: int):
        if k > self.order:
            raise DerivativeOrderError(
                f"derivative of order {k} requested from {self.name}, declared order is {self.order}")

    def derivative_expr(self, k: int) -> Expr:
        self.check_order(k)
        if self._relation is None:
            raise DerivativeOrderError(f"{self.name} has no derivative relation")
        with self._lock:
            if k in self._derivs:
                return self._derivs[k]
        from .calculus import derivative

        prev = self.derivative_expr(k - 1)
        d = derivative(prev)
        with self._lock:
            self._derivs.setdefault(k, d)
            return self._derivs[k]

    def values(self, t, k: int = 0):
        if k >= self.stored:
            raise DerivativeOrderError(f"{self.name} stores derivatives below {self.stored}")
        t = np.asarray(t, dtype=float)
        if not self.interval.contains(t, ENDPOINT_SLACK):
            bad = t[(t < self.interval.lo) | (t > self.interval.hi)]
            raise OutOfIntervalError(
                f"{self.name} is defined on {self.interval}, evaluated at {float(bad.reshape(-1)[0])!r}")
        lo, hi = self.interval.lo, self.interval.hi
        return self._evaluator(np.clip(t, lo, hi), k)

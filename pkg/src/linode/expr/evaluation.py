"""Vectorized floating-point evaluation and numeric equivalence.

An expression DAG is flattened once into a straight-line program (one slot
per distinct node) and then run over numpy arrays of sample times.  Any
non-finite intermediate value is reported as a singularity at the offending
sample points; this covers division by zero, logarithms of nonpositive
numbers and even roots of negative numbers in one rule.
"""

from __future__ import annotations

import numpy as np

from ..errors import SingularityError
from .core import ADD, CONST, FUNC, LEAF, MUL, POW, VAR, Expr, as_expr, topological
from .interval import as_interval

_UNARY = {
    "exp": np.exp,
    "ln": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "atan": np.arctan,
    "abs": np.abs,
}


def _pow(x, ex):
    if ex.denominator == 1:
        n = int(ex)
        if n == 2:
            return x * x
        if n == -1:
            return 1.0 / x
        return np.power(x, float(n))
    if ex.denominator % 2 == 1:
        # odd roots are real for negative bases
        mag = np.power(np.abs(x), float(ex))
        return mag if ex.numerator % 2 == 0 else np.sign(x) * mag
    return np.power(x, float(ex))


class Program:
    """Straight-line evaluation of one or more expressions sharing a DAG."""

    def __init__(self, exprs):
        self.roots = [as_expr(e) for e in exprs]
        slots = {}
        steps = []
        for root in self.roots:
            for node in topological(root):
                if node in slots:
                    continue
                slots[node] = len(steps)
                steps.append((node.kind, node.data, tuple(slots[a] for a in node.args), node))
        self.steps = steps
        self.outputs = [slots[r] for r in self.roots]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        flat = t.reshape(-1)
        vals = [None] * len(self.steps)
        with np.errstate(all="ignore"):
            for i, (kind, data, args, node) in enumerate(self.steps):
                if kind == CONST:
                    v = np.full(flat.shape, float(data))
                elif kind == VAR:
                    v = flat
                elif kind == ADD:
                    v = vals[args[0]] + vals[args[1]]
                    for j in args[2:]:
                        v = v + vals[j]
                elif kind == MUL:
                    v = vals[args[0]] * vals[args[1]]
                    for j in args[2:]:
                        v = v * vals[j]
                elif kind == POW:
                    v = _pow(vals[args[0]], data)
                elif kind == FUNC:
                    v = _UNARY[data](vals[args[0]])
                elif kind == LEAF:
                    leaf, k = data
                    v = np.asarray(leaf.values(vals[args[0]], k), dtype=float)
                else:  # pragma: no cover
                    raise AssertionError(kind)
                bad = ~np.isfinite(v)
                if bad.any():
                    idx = np.nonzero(bad)[0]
                    raise SingularityError(
                        f"singular evaluation of {_describe(node)} at t = {float(flat[idx[0]])!r}",
                        points=flat[idx],
                    )
                vals[i] = v
        return [vals[j].reshape(shape) for j in self.outputs]


def _describe(node: Expr) -> str:
    from .printer import serialize

    text = serialize(node)
    return text if len(text) < 80 else text[:77] + "..."


def program(e: Expr) -> Program:
    e = as_expr(e)
    if e._prog is None:
        e._prog = Program([e])
    return e._prog


def evaluate(e, t):
    """Value of ``e`` at ``t`` (scalar in, float out; array in, array out)."""
    out = program(e)(t)[0]
    if np.ndim(t) == 0:
        return float(out)
    return out


def evaluate_many(exprs, t):
    return Program(exprs)(t)


def _sample_with_jitter(exprs, ts, span):
    """Evaluate all expressions at ts; samples hitting a singularity move toward
    the interval centre by 1e-3 of the half width, at most three times."""
    prog = Program(exprs)
    ts = np.array(ts, dtype=float)
    centre = 0.5 * (span.lo + span.hi)
    step = 1e-3 * 0.5 * span.width
    for attempt in range(4):
        try:
            return ts, prog(ts)
        except SingularityError as err:
            if attempt == 3 or err.points is None:
                raise
            hit = np.isin(ts, err.points)
            ts[hit] += np.where(ts[hit] < centre, step, -step)
    raise AssertionError("unreachable")


def sample(exprs, interval, n: int = 50):
    """(ts, values) of the expressions at n Chebyshev points, with jitter."""
    span = as_interval(interval)
    return _sample_with_jitter(list(exprs), span.chebyshev(n), span)


def equiv_numeric(e1, e2, interval, n: int = 50, tol: float = 1e-9) -> bool:
    """True iff |e1 - e2| <= tol * (1 + |e1|) at n Chebyshev points of interval."""
    return max_rel_diff(e1, e2, interval, n) <= tol


def max_rel_diff(e1, e2, interval, n: int = 50) -> float:
    if n < 8:
        raise ValueError("equiv_numeric needs at least 8 samples")
    span = as_interval(interval)
    _, (v1, v2) = _sample_with_jitter([e1, e2], span.chebyshev(n), span)
    return float(np.max(np.abs(v1 - v2) / (1.0 + np.abs(v1))))


def sup_norm(e, interval, n: int = 50) -> float:
    span = as_interval(interval)
    _, (v,) = _sample_with_jitter([e], span.chebyshev(n), span)
    return float(np.max(np.abs(v)))


def is_zero_numeric(e, interval, n: int = 50, tol: float = 1e-9) -> bool:
    e = as_expr(e)
    if e.is_zero():
        return True
    if e.is_const:
        return abs(float(e.value)) <= tol
    return sup_norm(e, interval, n) <= tol

"""Monic linear ODEs x^(r) + a_{r-1} x^(r-1) + ... + a_0 x = b and their forms."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, LinodeError
from .expr import (ZERO, Expr, Interval, as_expr, as_interval, evaluate_many,
                   is_zero_numeric, serialize)


class ClassTag(enum.Enum):
    L = "L"
    L1 = "L1"  # rational form, a_{r-1} = 0
    L2 = "L2"  # Laguerre-Forsyth form, a_{r-1} = a_{r-2} = 0
    A1 = "A1"  # first Arnold form, a_0 = 0
    A2 = "A2"  # second Arnold form, a_0 = a_1 = 0
    HOMOGENEOUS = "homogeneous"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, text: str) -> "ClassTag":
        for tag in cls:
            if tag.value.lower() == text.strip().lower():
                return tag
        raise ValueError(f"unknown class tag {text!r}")


# coefficient indices that must vanish for each form
_CONSTRAINTS = {
    ClassTag.L: lambda r: (),
    ClassTag.L1: lambda r: (r - 1,),
    ClassTag.L2: lambda r: (r - 1, r - 2),
    ClassTag.A1: lambda r: (0,),
    ClassTag.A2: lambda r: (0, 1),
}

TAG_ORDER = (ClassTag.L, ClassTag.L1, ClassTag.L2, ClassTag.A1, ClassTag.A2, ClassTag.HOMOGENEOUS)


def vanishing_indices(tag: ClassTag, r: int):
    return _CONSTRAINTS[tag](r)


@dataclass(frozen=True)
class LinearODE:
    """x^(r) + sum_m a_m(t) x^(m) = b(t) on an interval; ``coeffs`` is (a_0, ..., a_{r-1})."""

    coeffs: tuple
    rhs: Expr = ZERO
    interval: Interval = field(default_factory=lambda: Interval(-1.0, 1.0))

    def __post_init__(self):
        coeffs = tuple(as_expr(a) for a in self.coeffs)
        if len(coeffs) < 2:
            raise LinodeError("a linear ODE here has order at least 2", code="order")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", as_expr(self.rhs))
        object.__setattr__(self, "interval", as_interval(self.interval))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def r(self) -> int:
        return len(self.coeffs)

    def coefficient(self, m: int) -> Expr:
        """a_m, with a_r = 1."""
        if m == self.order:
            return as_expr(1)
        return self.coeffs[m]

    @property
    def is_homogeneous(self) -> bool:
        return self.rhs.is_zero()

    def homogeneous_part(self) -> "LinearODE":
        if self.rhs.is_zero():
            return self
        return LinearODE(self.coeffs, ZERO, self.interval)

    def with_interval(self, interval) -> "LinearODE":
        return LinearODE(self.coeffs, self.rhs, interval)

    def check_evaluable(self, n: int = 16):
        """Evaluate every coefficient on a sample grid; raises on failure."""
        ts = np.append(self.interval.chebyshev(n), self.interval.midpoint)
        evaluate_many(list(self.coeffs) + [self.rhs], ts)

    def residual(self, jet, t0: float) -> float:
        return residual(self, jet, t0)

    def to_document(self, rename=None) -> str:
        lines = [f"order = {self.order}"]
        for m, a in enumerate(self.coeffs):
            lines.append(f"a{m} = {serialize(a, rename)}")
        lines.append(f"b = {serialize(self.rhs, rename)}")
        lines.append(f"interval = {self.interval}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        return self.to_document()


def residual(ode: LinearODE, jet, t0: float) -> float:
    """x^(r) + sum a_m(t0) x^(m) - b(t0) for the jet (x, x', ..., x^(r))."""
    r = ode.order
    jet = np.asarray(jet, dtype=float)
    if jet.shape[0] != r + 1:
        raise EvaluationError(f"jet must have {r + 1} entries, got {jet.shape[0]}")
    vals = evaluate_many(list(ode.coeffs) + [ode.rhs], float(t0))
    total = jet[r]
    for m in range(r):
        total = total + float(vals[m]) * jet[m]
    return float(total - float(vals[r]))


def residual_many(ode: LinearODE, jets, ts) -> np.ndarray:
    """Vectorized residual: jets has shape (r+1, n) aligned with ts."""
    r = ode.order
    vals = evaluate_many(list(ode.coeffs) + [ode.rhs], np.asarray(ts, dtype=float))
    total = np.array(jets[r], dtype=float)
    for m in range(r):
        total = total + vals[m] * jets[m]
    return total - vals[r]


def _vanishes(e: Expr, interval, tol: float, n: int) -> bool:
    try:
        return is_zero_numeric(e, interval, n=n, tol=tol)
    except EvaluationError:
        return False


def form_of(ode: LinearODE, tol: float = 1e-9, n: int = 50) -> frozenset:
    """Every class tag whose defining constraints hold, plus HOMOGENEOUS iff b = 0."""
    r = ode.order
    zero = {m: _vanishes(ode.coeffs[m], ode.interval, tol, n) for m in range(r)}
    tags = set()
    for tag, rule in _CONSTRAINTS.items():
        if all(zero[m] for m in rule(r)):
            tags.add(tag)
    if _vanishes(ode.rhs, ode.interval, tol, n):
        tags.add(ClassTag.HOMOGENEOUS)
    return frozenset(tags)


def format_tags(tags) -> str:
    return "{" + ", ".join(str(t) for t in TAG_ORDER if t in tags) + "}"

"""Closed real intervals and the deterministic sample grids used on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import IntervalError


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise IntervalError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise IntervalError(f"interval needs lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, t, slack: float = 0.0) -> bool:
        pad = slack * max(1.0, self.width)
        arr = np.asarray(t, dtype=float)
        return bool(np.all((arr >= self.lo - pad) & (arr <= self.hi + pad)))

    def contains_interval(self, other: "Interval", rel: float = 1e-9) -> bool:
        pad = rel * max(1.0, self.width)
        return other.lo >= self.lo - pad and other.hi <= self.hi + pad

    def chebyshev(self, n: int) -> np.ndarray:
        """n Chebyshev points of the first kind, ascending, strictly interior."""
        k = np.arange(n)
        x = -np.cos((2 * k + 1) * np.pi / (2 * n))
        return self.midpoint + 0.5 * self.width * x

    def linspace(self, n: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def shrink(self, fraction: float) -> "Interval":
        pad = fraction * self.width
        return Interval(self.lo + pad, self.hi - pad)

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __str__(self):
        return f"[{self.lo:.17g}, {self.hi:.17g}]"


def as_interval(v) -> Interval:
    if isinstance(v, Interval):
        return v
    lo, hi = v
    return Interval(lo, hi)

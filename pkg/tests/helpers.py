"""Deterministic random equations and transformations shared by the tests."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from linode.expr import ONE, ZERO, T, add, atan, const, exp, ln, mul, power, sin
from linode.ode import LinearODE
from linode.transform import PointTransformation

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def rational(x: float, den: int = 1000) -> Fraction:
    return Fraction(x).limit_denominator(den)


def random_poly(rng, degree: int = 3, lo: float = -2.0, hi: float = 2.0):
    coeffs = [rational(rng.uniform(lo, hi)) for _ in range(degree + 1)]
    return add(*[mul(const(c), power(T, k)) for k, c in enumerate(coeffs)])


def random_ode(rng, r: int, interval=(1.0, 2.0), degree: int = 3, rhs: bool = True,
               rational_form: bool = False) -> LinearODE:
    coeffs = [random_poly(rng, degree) for _ in range(r)]
    if rational_form:
        coeffs[r - 1] = ZERO
    b = random_poly(rng, degree) if rhs else ZERO
    return LinearODE(tuple(coeffs), b, interval)


def _positive_x1(rng, interval=(1.0, 2.0)):
    # exponents shrink on wide intervals (e.g. the image of an exponential T) so X1
    # stays away from 0; the scale is 1 on intervals inside [-2, 2]
    scale = max(1.0, max(abs(interval[0]), abs(interval[1])) / 2)
    kind = rng.integers(3)
    u = rng.uniform(-1, 1)
    if kind == 0:
        return exp(mul(const(rational(u / scale)), T))
    if kind == 1:
        return add(ONE, mul(const(rational(rng.uniform(0.1, 1))), power(T, 2)))
    return mul(const(rational(rng.uniform(0.5, 2))), exp(mul(const(rational(u / scale ** 2)), power(T, 2))))


def random_T(rng, interval, kind: str | None = None):
    """A monotone T on the interval, of one of several shapes."""
    lo, hi = interval
    kinds = ("affine", "mobius", "exp", "log", "quadratic", "atan")
    kind = kind or kinds[rng.integers(len(kinds))]
    if kind == "affine":
        a = rational(rng.choice([-1, 1]) * rng.uniform(0.5, 2))
        return add(mul(const(a), T), const(rational(rng.uniform(-1, 1))))
    if kind == "mobius":
        # pole outside the interval, at least half a width away
        pole = hi + rng.uniform(0.5, 2) * (hi - lo) if rng.random() < 0.5 else lo - rng.uniform(0.5, 2) * (hi - lo)
        pole = rational(pole)
        a, b = rational(rng.uniform(-2, 2)), rational(rng.uniform(-2, 2))
        while abs(a * (-pole) - b) < Fraction(1, 10):  # ad - bc with c = 1, d = -pole
            a += 1
        return mul(add(mul(const(a), T), const(b)), power(add(T, const(-pole)), -1))
    if kind == "exp":
        k = rational(rng.choice([-1, 1]) * rng.uniform(0.3, 1.5))
        return exp(mul(const(k), T))
    if kind == "log":
        s = rational(-lo + rng.uniform(0.5, 2))
        return ln(add(T, const(s)))
    if kind == "quadratic":
        # 1 + 2 b t > 0 on the interval
        m = max(abs(lo), abs(hi))
        b = rational(rng.uniform(-0.3, 0.3) / m)
        return add(T, mul(const(b), power(T, 2)))
    if kind == "atan":
        return atan(add(mul(const(rational(rng.uniform(0.5, 1.5))), T), const(rational(rng.uniform(-1, 1)))))
    raise ValueError(kind)


def random_transformation(rng, interval=(1.0, 2.0), kind: str | None = None,
                          x0: bool = True) -> PointTransformation:
    X0 = ZERO
    if x0:
        X0 = add(random_poly(rng, 2, -1, 1), mul(const(rational(rng.uniform(-1, 1))), sin(T)))
    return PointTransformation(random_T(rng, interval, kind), _positive_x1(rng, interval), X0, interval)


def random_l1_transformation(rng, r: int, interval, kind: str | None = None) -> PointTransformation:
    """X1 = C |T_t|^((r-1)/2): preserves the rational form."""
    Tf = random_T(rng, interval, kind)
    from linode.expr import absolute, derivative

    C = const(rational(rng.uniform(0.5, 2)))
    X1 = mul(C, power(absolute(derivative(Tf)), Fraction(r - 1, 2)))
    return PointTransformation(Tf, X1, ZERO, interval)


def load(name: str) -> str:
    return (FIXTURES / name).read_text()

"""Reductions of an equation to the rational, Laguerre-Forsyth and Arnold forms.

Every gauge is a point transformation built from the equation itself:

* rational form: T = t, X1 = exp((1/r) * integral of a_{r-1});
* Laguerre-Forsyth form: from rational form, T solves
  T''' = (3/2) T''^2 / T' + c a_{r-2} T' with c = 12 / (r (r^2 - 1)),
  i.e. the Schwarzian of T equals c a_{r-2}; X1 = T'^((r-1)/2);
* first Arnold form: T = t, X1 = 1/phi with phi a homogeneous solution;
* second Arnold form: T = psi2/psi1, X1 = 1/psi1 with two independent
  homogeneous solutions.

Initial data are fixed (T-jet (t0, 1, 0), phi-jet (1, 0, ..., 0), psi2-jet
(t0, 1, 0, ..., 0)) so the results are deterministic.  T' starts at 1 and the
integration stops before it leaves [1e-3, 1e3], so T' > 0 throughout and
|T'| in the half-integer powers for even r is just T'.  Where a solution used
as a denominator gets small the working interval shrinks to the largest piece
around t0 on which the nonvanishing conditions hold, and the shrink is
reported in the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EvaluationError, GaugeError, SolverError
from .expr import (ONE, ZERO, Expr, Interval, NumericLeaf, Program, T, add, as_interval,
                   const, exp, leaf_call, mul, power, sup_norm)
from .numeric import DEFAULT_TOL, antiderivative, integrate, solve_linear_ivps
from .ode import ClassTag, LinearODE, vanishing_indices
from .transform import PointTransformation, apply_to_ode, compose, identity

DIAGNOSTIC_SAMPLES = 50
TPRIME_BOUNDS = (1e-3, 1e3)
DENOMINATOR_FLOOR = 1e-3


@dataclass(frozen=True)
class GaugeResult:
    transformation: PointTransformation
    ode: LinearODE
    diagnostics: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return self.diagnostics.get("residual", 0.0)


def _is_zero(e: Expr, interval: Interval, tol: float = 1e-12) -> bool:
    if e.is_zero():
        return True
    try:
        return sup_norm(e, interval, DIAGNOSTIC_SAMPLES) <= tol
    except EvaluationError:
        return False


def _diagnose(ode: LinearODE, tag: ClassTag, source: Interval, **extra) -> dict:
    r = ode.order
    sup = {}
    for m in vanishing_indices(tag, r):
        sup[f"a{m}"] = sup_norm(ode.coeffs[m], ode.interval, DIAGNOSTIC_SAMPLES)
    diag = {"form": str(tag), "sup": sup, "residual": max(sup.values(), default=0.0)}
    diag.update(extra)
    return diag


def _result(tau: PointTransformation, source: LinearODE, gauged: LinearODE, tag: ClassTag,
            working: Interval, **extra) -> GaugeResult:
    if working != source.interval:
        extra["shrunk"] = [working.lo, working.hi]
    return GaugeResult(tau, gauged, _diagnose(gauged, tag, source.interval, **extra))


def _t0(ode: LinearODE, t0) -> float:
    t0 = ode.interval.midpoint if t0 is None else float(t0)
    if not ode.interval.contains(t0):
        raise GaugeError(f"t0 = {t0} outside {ode.interval}", code="interval")
    return t0


# ---------------------------------------------------------------------------

def to_rational(ode: LinearODE) -> GaugeResult:
    r = ode.order
    a = ode.coeffs[r - 1]
    if _is_zero(a, ode.interval):
        tau = identity(ode.interval)
        return _result(tau, ode, ode, ClassTag.L1, ode.interval)
    try:
        F = antiderivative(mul(const(Fraction(1, r)), a), ode.interval.midpoint, ode.interval)
    except (EvaluationError, SolverError) as err:
        raise GaugeError(f"antiderivative of a_{r - 1} failed: {err}") from err
    tau = PointTransformation(T, exp(F), ZERO, ode.interval)
    return _result(tau, ode, apply_to_ode(tau, ode), ClassTag.L1, ode.interval)


def _bounded_away(vals, ts, t0) -> np.ndarray:
    """Samples at least DENOMINATOR_FLOOR from zero with the sign taken at t0
    (a sign check as well, since a zero can fall between grid points)."""
    sign = np.sign(vals[int(np.argmin(np.abs(ts - t0)))])
    return (np.abs(vals) >= DENOMINATOR_FLOOR) & (np.sign(vals) == sign)


def _shrink_around(ts, ok, t0) -> Interval:
    """Largest run of consecutive True samples containing the sample nearest t0."""
    i0 = int(np.argmin(np.abs(ts - t0)))
    if not ok[i0]:
        raise GaugeError(f"gauge degenerate at t0 = {t0}")
    lo = i0
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = i0
    while hi < len(ts) - 1 and ok[hi + 1]:
        hi += 1
    if hi == lo:
        raise GaugeError("working interval collapsed to a point")
    return Interval(ts[lo], ts[hi])


def lf_transformation(a: Expr, r: int, interval: Interval, t0: float, tol: float = DEFAULT_TOL):
    """(T, T') for the Laguerre-Forsyth gauge of a rational-form equation with
    a_{r-2} = a, and the interval actually covered."""
    c = Fraction(12, r * (r * r - 1))
    prog = Program([a])
    lo_b, hi_b = TPRIME_BOUNDS

    def fun(t, y):
        av = prog(np.array([t]))[0][0]
        return np.array([y[1], y[2], 1.5 * y[2] * y[2] / y[1] + float(c) * av * y[1]])

    def keep_going(t, y):
        return lo_b <= y[1] <= hi_b

    traj = integrate(fun, t0, np.array([t0, 1.0, 0.0]), interval, tol, keep_going)

    def evaluator(t, k):
        return traj(t)[k]

    leaf = NumericLeaf("lf", traj.interval, 3, evaluator,
                       provenance={"kind": "laguerre-forsyth", "t0": t0, "r": r, "tol": tol},
                       tolerance=tol)
    d1, d2 = leaf_call(leaf, 1), leaf_call(leaf, 2)
    leaf.set_relation(add(mul(const("3/2"), power(d2, 2), power(d1, -1)), mul(const(c), a, d1)))
    return leaf_call(leaf, 0), d1, traj.interval


def to_laguerre_forsyth(ode: LinearODE, t0=None) -> GaugeResult:
    r = ode.order
    if r < 3:
        raise GaugeError("the Laguerre-Forsyth form needs order r >= 3", code="order")
    t0 = _t0(ode, t0)
    first = to_rational(ode)
    rational = first.ode
    a = rational.coeffs[r - 2]
    if _is_zero(a, rational.interval):
        return _result(first.transformation, ode, rational, ClassTag.L2, ode.interval)
    try:
        Tf, Tt, working = lf_transformation(a, r, rational.interval, t0)
    except SolverError as err:
        raise GaugeError(f"Laguerre-Forsyth gauge integration failed: {err}", code="solver") from err
    tau_lf = PointTransformation(Tf, power(Tt, Fraction(r - 1, 2)), ZERO, working)
    gauged = apply_to_ode(tau_lf, rational.with_interval(working))
    if first.transformation.is_identity_structurally():
        tau = tau_lf
    else:
        tau = compose(tau_lf, first.transformation.restrict(working))
    return _result(tau, ode, gauged, ClassTag.L2, working)


def _homogeneous_solutions(ode: LinearODE, t0: float, inits, prefix):
    hom = ode.homogeneous_part()
    try:
        return solve_linear_ivps(hom, t0, inits, prefix=prefix)
    except SolverError as err:
        raise GaugeError(f"homogeneous solve failed: {err}", code="solver") from err


def to_arnold1(ode: LinearODE, t0=None) -> GaugeResult:
    r = ode.order
    t0 = _t0(ode, t0)
    if _is_zero(ode.coeffs[0], ode.interval):
        return _result(identity(ode.interval), ode, ode, ClassTag.A1, ode.interval)
    init = [1.0] + [0.0] * (r - 1)
    (phi,) = _homogeneous_solutions(ode, t0, [init], "phi")
    ts = np.union1d(ode.interval.linspace(2001), [t0])
    vals = phi.leaf.values(ts, 0)
    working = _shrink_around(ts, _bounded_away(vals, ts, t0), t0)
    tau = PointTransformation(T, power(phi.solution, -1), ZERO, working)
    gauged = apply_to_ode(tau, ode.with_interval(working))
    return _result(tau, ode, gauged, ClassTag.A1, working)


def to_arnold2(ode: LinearODE, t0=None) -> GaugeResult:
    r = ode.order
    t0 = _t0(ode, t0)
    if _is_zero(ode.coeffs[0], ode.interval) and _is_zero(ode.coeffs[1], ode.interval):
        return _result(identity(ode.interval), ode, ode, ClassTag.A2, ode.interval)
    e1 = [1.0] + [0.0] * (r - 1)
    e2 = [t0, 1.0] + [0.0] * (r - 2)
    psi1, psi2 = _homogeneous_solutions(ode, t0, [e1, e2], "psi")
    ts = np.union1d(ode.interval.linspace(2001), [t0])
    p1, dp1 = psi1.leaf.values(ts, 0), psi1.leaf.values(ts, 1)
    p2, dp2 = psi2.leaf.values(ts, 0), psi2.leaf.values(ts, 1)
    wr = p1 * dp2 - p2 * dp1
    ok = _bounded_away(p1, ts, t0) & _bounded_away(wr, ts, t0)
    working = _shrink_around(ts, ok, t0)
    inv1 = power(psi1.solution, -1)
    tau = PointTransformation(mul(psi2.solution, inv1), inv1, ZERO, working)
    gauged = apply_to_ode(tau, ode.with_interval(working))
    return _result(tau, ode, gauged, ClassTag.A2, working)


GAUGES = {
    "rational": lambda ode, t0=None: to_rational(ode),
    "lf": to_laguerre_forsyth,
    "arnold1": to_arnold1,
    "arnold2": to_arnold2,
}

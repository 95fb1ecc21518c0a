"""Admissible transformations and equivalence-group membership.

An admissible transformation is a triple (source, target, tau) with
apply_to_ode(tau, source) = target.  The predicates here are structural
checks of the transformation shapes that each class admits:

* L: any valid T, X1, X0;
* L1 (a_{r-1} = 0): X1 = C |T_t|^((r-1)/2);
* L2 (a_{r-1} = a_{r-2} = 0): additionally T Moebius (Schwarzian zero);
* A1 (a_0 = 0): X1 constant;
* A2 (a_0 = a_1 = 0): T = (alpha t + beta)/(gamma t + delta) and
  X1 = C/(gamma t + delta);
* homogeneous subclasses: additionally X0 = 0.

Between two equations of an Arnold class the admissible maps are wider:
1/X1 (and T/X1 for A2) must solve the source.  For the homogeneous
subclasses the admissible maps are those whose X0/X1 solves the source; for
L1 and L2 this is the same as the products T_t^(-(r-1)/2) X0 and
(gamma t + delta)^(r-1) X0 up to the constant C.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EvaluationError, LinodeError, TransformationError
from .expr import (Expr, Interval, T, absolute, as_interval, const, derivatives,
                   mul, power, sample, serialize)
from .ode import ClassTag, LinearODE, form_of
from .transform import PointTransformation, apply_to_ode, schwarzian

DEFAULT_TOL = 1e-7
DEFAULT_SAMPLES = 50
SHAPE_SAMPLES = 20


@dataclass(frozen=True)
class Verdict:
    """Boolean result with a reason and supporting numbers."""

    ok: bool
    reason: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class AdmissibleTransformation:
    source: LinearODE
    target: LinearODE
    tau: PointTransformation

    @classmethod
    def generated(cls, source: LinearODE, tau: PointTransformation) -> "AdmissibleTransformation":
        """The triple (source, tau(source), tau)."""
        return cls(source, apply_to_ode(tau, source), tau)


# ---------------------------------------------------------------------------
# admissibility

def verify_admissible(cand: AdmissibleTransformation, tol: float = DEFAULT_TOL,
                      n: int = DEFAULT_SAMPLES) -> Verdict:
    """Compare apply_to_ode(tau, source) with target coefficient by coefficient.

    Both sides are sampled at n Chebyshev points of the target interval and
    must agree to tol * (1 + |mapped|); the worst coefficient and the point
    where it occurs are reported.
    """
    src, tgt = cand.source, cand.target
    if src.order != tgt.order:
        return Verdict(False, "order", {"source": src.order, "target": tgt.order})
    mapped = apply_to_ode(cand.tau, src)
    span = tgt.interval
    if not mapped.interval.contains_interval(span, 1e-8):
        return Verdict(False, "interval", {"image": [mapped.interval.lo, mapped.interval.hi],
                                           "target": [span.lo, span.hi]})
    span = Interval(max(span.lo, mapped.interval.lo), min(span.hi, mapped.interval.hi))
    names = [f"a{m}" for m in range(src.order)] + ["b"]
    pairs = list(zip(mapped.coeffs, tgt.coeffs)) + [(mapped.rhs, tgt.rhs)]
    exprs = [e for pair in pairs for e in pair]
    try:
        ts, vals = sample(exprs, span, n)
    except EvaluationError as err:
        return Verdict(False, "unevaluable", {"error": str(err)})
    worst = {"coefficient": None, "t": None, "error": 0.0}
    for i, name in enumerate(names):
        v1, v2 = vals[2 * i], vals[2 * i + 1]
        rel = np.abs(v1 - v2) / (1.0 + np.abs(v1))
        j = int(np.argmax(rel))
        if rel[j] > worst["error"] or worst["coefficient"] is None:
            worst = {"coefficient": name, "t": float(ts[j]), "error": float(rel[j])}
    ok = worst["error"] <= tol
    return Verdict(ok, "agree" if ok else f"{worst['coefficient']} differs", worst)


# ---------------------------------------------------------------------------
# Moebius recovery

@dataclass(frozen=True)
class MobiusFit:
    alpha: float
    beta: float
    gamma: float
    delta: float
    error: float

    def denominator(self) -> Expr:
        return const(Fraction(self.gamma)) * T + const(Fraction(self.delta))


def fit_mobius(Tf: Expr, interval, n: int = DEFAULT_SAMPLES) -> MobiusFit:
    """Fit T = (alpha t + beta)/(gamma t + delta) from 4 samples.

    The parameters solve alpha t + beta - T (gamma t + delta) = 0 at the
    samples (a null vector, via SVD) and are scaled to |alpha delta - beta
    gamma| = 1 with alpha >= 0 (gamma > 0 when alpha = 0).  ``error`` is the
    relative misfit over n Chebyshev points.
    """
    span = as_interval(interval)
    ts4, (y4,) = sample([Tf], span, 4)
    rows = np.column_stack([ts4, np.ones(4), -y4 * ts4, -y4])
    v = np.linalg.svd(rows)[2][-1]
    det = v[0] * v[3] - v[1] * v[2]
    if abs(det) < 1e-14 * max(1.0, float(np.max(np.abs(v))) ** 2):
        return MobiusFit(*v, error=float("inf"))
    v = v / np.sqrt(abs(det))
    lead = v[0] if abs(v[0]) > 1e-14 else v[2]
    if lead < 0:
        v = -v
    alpha, beta, gamma, delta = (float(x) for x in v)
    ts, (y,) = sample([Tf], span, n)
    den = gamma * ts + delta
    if np.any(np.abs(den) < 1e-300):
        return MobiusFit(alpha, beta, gamma, delta, float("inf"))
    fit = (alpha * ts + beta) / den
    err = float(np.max(np.abs(fit - y) / (1.0 + np.abs(y))))
    return MobiusFit(alpha, beta, gamma, delta, err)


# ---------------------------------------------------------------------------
# structural predicates

def _constant_test(e: Expr, span: Interval, tol: float, n: int):
    """(is constant, relative variation) from sup|e'| * width against sup|e|."""
    if e.free_of_t():
        return True, 0.0
    _, (v, dv) = sample([e, derivatives(e, 1)[1]], span, n)
    scale = max(float(np.max(np.abs(v))), 1e-300)
    var = float(np.max(np.abs(dv))) * span.width / scale
    return var <= tol, var


def _sup(e: Expr, span: Interval, n: int) -> float:
    if e.is_zero():
        return 0.0
    return float(np.max(np.abs(sample([e], span, n)[1][0])))


def _schwarzian_check(tau: PointTransformation, tol: float, n: int):
    s = _sup(schwarzian(tau.T), tau.interval, n)
    return s <= tol, s


def in_equivalence_group(tau: PointTransformation, tag, r: int, homogeneous: bool = False,
                         tol: float = DEFAULT_TOL, n: int = DEFAULT_SAMPLES) -> Verdict:
    """Whether tau has the shape of an equivalence transformation of the class."""
    tag = ClassTag.parse(tag) if isinstance(tag, str) else tag
    if tag is ClassTag.HOMOGENEOUS:
        tag, homogeneous = ClassTag.L, True
    try:
        tau.validate()
    except TransformationError as err:
        return Verdict(False, f"invalid transformation: {err}", {"code": err.code})
    span = tau.interval
    details = {"class": str(tag), "order": r, "homogeneous": homogeneous}
    try:
        verdict = _group_shape(tau, tag, r, span, tol, n, details)
        if verdict is None and homogeneous:
            x0 = _sup(tau.X0, span, n)
            details["sup_X0"] = x0
            if x0 > tol:
                verdict = Verdict(False, "X0 does not vanish", details)
    except EvaluationError as err:
        return Verdict(False, f"unevaluable: {err}", details)
    return Verdict(True, "shape matches", details) if verdict is None else verdict


def _group_shape(tau, tag, r, span, tol, n, details):
    if tag is ClassTag.L:
        return None
    if tag is ClassTag.A1:
        ok, var = _constant_test(tau.X1, span, tol, n)
        details["x1_variation"] = var
        return None if ok else Verdict(False, "X1 is not constant", details)
    if tag in (ClassTag.L1, ClassTag.L2):
        ratio = mul(tau.X1, power(absolute(tau.T_t), Fraction(-(r - 1), 2)))
        ok, var = _constant_test(ratio, span, tol, n)
        details["x1_ratio_variation"] = var
        if not ok:
            return Verdict(False, f"X1 is not C*|T_t|^({r - 1}/2)", details)
        if tag is ClassTag.L1:
            return None
    ok, s = _schwarzian_check(tau, tol, n)
    details["sup_schwarzian"] = s
    if not ok:
        return Verdict(False, "Schwarzian nonzero", details)
    if tag is ClassTag.L2:
        return None
    # A2
    fit = fit_mobius(tau.T, span, n)
    details["mobius"] = [fit.alpha, fit.beta, fit.gamma, fit.delta]
    details["mobius_error"] = fit.error
    if not fit.error <= tol:
        return Verdict(False, "T is not Moebius", details)
    ok, var = _constant_test(mul(tau.X1, fit.denominator()), span, tol, n)
    details["x1_ratio_variation"] = var
    if not ok:
        return Verdict(False, "X1 is not C/(gamma t + delta)", details)
    return None


# ---------------------------------------------------------------------------
# admissible shapes between equations of a class

def solves(x: Expr, ode: LinearODE, tol: float = DEFAULT_TOL, n: int = SHAPE_SAMPLES):
    """(solves the homogeneous part, scaled residual) at n sample points."""
    hom = ode.homogeneous_part()
    r = ode.order
    jets = derivatives(x, r)
    _, vals = sample(jets + list(hom.coeffs), ode.interval, n)
    res = vals[r] + sum(vals[r + 1 + m] * vals[m] for m in range(r))
    scale = 1.0 + np.max(np.abs(vals[: r + 1]))
    err = float(np.max(np.abs(res)) / scale)
    return err <= tol, err


def admissible_shape(tau: PointTransformation, source: LinearODE, tag, homogeneous: bool = False,
                     tol: float = DEFAULT_TOL) -> Verdict:
    """Whether tau has the shape of an admissible map from source within the class.

    L1 and L2 are normalized, so their shape is the equivalence-group shape.
    A1 needs psi1 = 1/X1 to solve the source, A2 also psi2 = T/X1.  For
    homogeneous classes X0/X1 must solve the source as well.
    """
    tag = ClassTag.parse(tag) if isinstance(tag, str) else tag
    if tag is ClassTag.HOMOGENEOUS:
        tag, homogeneous = ClassTag.L, True
    r = source.order
    details = {"class": str(tag), "homogeneous": homogeneous}
    if tag in (ClassTag.A1, ClassTag.A2) and r < 3:
        return Verdict(False, "Arnold shapes need order r >= 3", details)
    wanted = {tag} | ({ClassTag.HOMOGENEOUS} if homogeneous else set())
    if not wanted <= form_of(source, tol=tol):
        return Verdict(False, f"source is not in class {tag}", details)
    try:
        tau = tau.restrict(source.interval).validate()
    except LinodeError as err:
        return Verdict(False, f"invalid transformation: {err}", details)
    checks = []
    if tag in (ClassTag.L1, ClassTag.L2):
        group = in_equivalence_group(tau, tag, r, tol=tol)
        if not group:
            return Verdict(False, group.reason, {**details, **group.details})
    if tag in (ClassTag.A1, ClassTag.A2):
        psi1 = power(tau.X1, -1)
        checks.append(("psi1 = 1/X1", psi1))
        if tag is ClassTag.A2:
            checks.append(("psi2 = T/X1", mul(tau.T, psi1)))
    if homogeneous:
        checks.append(("X0/X1", mul(tau.X0, power(tau.X1, -1))))
    for name, x in checks:
        try:
            ok, err = solves(x, source, tol)
        except EvaluationError as exc:
            return Verdict(False, f"{name} unevaluable: {exc}", details)
        details[name] = {"expr": serialize(x), "residual": err}
        if not ok:
            return Verdict(False, f"{name} does not solve the source", details)
    return Verdict(True, "shape matches", details)

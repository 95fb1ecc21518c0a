"""Lie point symmetries of linear ODEs and the symmetry-dimension classifier.

Symmetries of an r-th order linear equation (r >= 3) have the shape
Q = tau(t) d/dt + (xi1(t) x + xi0(t)) d/dx.  Prolongation is done on affine
forms in the jet (x, x', ..., x^(r)) with expression coefficients, so the
invariance residual pr Q(F) - lambda F, lambda = xi1 - r tau', is itself an
affine form and is checked exactly on the 2(r+1) jets +-e_j.

The classifier decides between r+4 (equivalent to x^(r) = 0), r+2
(equivalent to a constant-coefficient equation) and r+1:

1. gauge to the Laguerre-Forsyth form; if every coefficient vanishes the
   equation is elementary;
2. look for the three canonical shapes in the rational form of the given
   equation (constant coefficients, Euler t^(r-m) a_m = const, the
   projective family) and return the matching straightening map;
3. otherwise test which combinations of P, D, K are symmetries of the
   Laguerre-Forsyth form (its equivalence group is Moebius, so any extra
   symmetry lives in this sl(2)); a one-dimensional null space means r+2,
   and the null vector is straightened into a witness map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EvaluationError, GaugeError, LinodeError, TransformationError
from .expr import (ONE, ZERO, Expr, Interval, Program, T, absolute, add, as_expr,
                   as_interval, atan, const, derivative, equiv_numeric, evaluate,
                   evaluate_many, ln, mul, neg, power, serialize, sup_norm)
from .numeric import antiderivative
from .ode import LinearODE
from .transform import PointTransformation, apply_to_ode, compose, identity

CLASSIFY_TOL = 1e-7
NULLSPACE_TOL = 1e-6


@dataclass(frozen=True)
class VectorFieldLin:
    """Q = tau d/dt + (xi1 x + xi0) d/dx."""

    tau: Expr = ZERO
    xi1: Expr = ZERO
    xi0: Expr = ZERO

    def __post_init__(self):
        object.__setattr__(self, "tau", as_expr(self.tau))
        object.__setattr__(self, "xi1", as_expr(self.xi1))
        object.__setattr__(self, "xi0", as_expr(self.xi0))

    def __add__(self, other):
        return VectorFieldLin(add(self.tau, other.tau), add(self.xi1, other.xi1), add(self.xi0, other.xi0))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "VectorFieldLin":
        c = as_expr(c)
        return VectorFieldLin(mul(c, self.tau), mul(c, self.xi1), mul(c, self.xi0))

    def is_zero(self) -> bool:
        return self.tau.is_zero() and self.xi1.is_zero() and self.xi0.is_zero()

    def __str__(self):
        return f"tau = {serialize(self.tau)}\nxi1 = {serialize(self.xi1)}\nxi0 = {serialize(self.xi0)}\n"


def lie_bracket(q1: VectorFieldLin, q2: VectorFieldLin) -> VectorFieldLin:
    """Commutator of two fields affine in x; the result has the same shape."""
    t1, t2 = q1.tau, q2.tau
    tau = add(mul(t1, derivative(t2)), neg(mul(t2, derivative(t1))))
    xi1 = add(mul(t1, derivative(q2.xi1)), neg(mul(t2, derivative(q1.xi1))))
    xi0 = add(mul(t1, derivative(q2.xi0)), neg(mul(t2, derivative(q1.xi0))),
              mul(q1.xi0, q2.xi1), neg(mul(q2.xi0, q1.xi1)))
    return VectorFieldLin(tau, xi1, xi0)


def scaling_field() -> VectorFieldLin:
    return VectorFieldLin(ZERO, ONE, ZERO)


def superposition_field(phi) -> VectorFieldLin:
    return VectorFieldLin(ZERO, ZERO, phi)


def R(tau, r: int) -> VectorFieldLin:
    """R(tau) = tau d/dt + ((r-1)/2) tau' x d/dx."""
    tau = as_expr(tau)
    return VectorFieldLin(tau, mul(const(Fraction(r - 1, 2)), derivative(tau)), ZERO)


@dataclass(frozen=True)
class SL2Realization:
    r: int

    @property
    def P(self) -> VectorFieldLin:
        return R(ONE, self.r)

    @property
    def D(self) -> VectorFieldLin:
        return R(T, self.r)

    @property
    def K(self) -> VectorFieldLin:
        return R(power(T, 2), self.r)

    def fields(self):
        return self.P, self.D, self.K


def sl2(r: int) -> SL2Realization:
    return SL2Realization(r)


# ---------------------------------------------------------------------------
# prolongation

def _dt_form(form: dict) -> dict:
    """Total derivative of sum_j c_j x^(j) + c_{-1}."""
    out = {}
    for j, c in form.items():
        out[j] = add(out.get(j, ZERO), derivative(c))
        if j >= 0:
            out[j + 1] = add(out.get(j + 1, ZERO), c)
    return out


def prolongation(Q: VectorFieldLin, r: int):
    """[eta^(0), ..., eta^(r)] as affine forms {j: coeff}, j = -1 for the constant."""
    dtau = derivative(Q.tau)
    eta = [{-1: Q.xi0, 0: Q.xi1}]
    for k in range(r):
        nxt = _dt_form(eta[k])
        nxt[k + 1] = add(nxt.get(k + 1, ZERO), neg(dtau))
        eta.append(nxt)
    return eta


def residual_form(Q: VectorFieldLin, ode: LinearODE):
    """Coefficients (c_{-1}, c_0, ..., c_r) of pr Q(F) - lambda F, with
    F = x^(r) + sum a_m x^(m) - b."""
    r = ode.order
    eta = prolongation(Q, r)
    lam = add(Q.xi1, mul(const(-r), derivative(Q.tau)))
    acc = {j: [] for j in range(-1, r + 1)}
    for m in range(r):
        a = ode.coeffs[m]
        acc[m].append(mul(Q.tau, derivative(a)))
        for j, c in eta[m].items():
            acc[j].append(mul(a, c))
        acc[m].append(neg(mul(lam, a)))
    for j, c in eta[r].items():
        acc[j].append(c)
    acc[r].append(neg(lam))
    acc[-1].append(neg(mul(Q.tau, derivative(ode.rhs))))
    acc[-1].append(mul(lam, ode.rhs))
    return [add(*acc[j]) for j in range(-1, r + 1)]


def _jet_sup(values) -> np.ndarray:
    """sup over jets +-e_j of |c_{-1} +- c_j|, for values shaped (r+2, n)."""
    const_part = values[0]
    lin = values[1:]
    return np.max(np.abs(const_part)[None, :] + np.abs(lin), axis=0)


def prolong_residual(Q: VectorFieldLin, ode: LinearODE, t0) -> float:
    """Largest invariance residual over the canonical jet samples at t0
    (t0 may be an array; the sup is then taken over all of them)."""
    forms = residual_form(Q, ode)
    ts = np.atleast_1d(np.asarray(t0, dtype=float))
    vals = np.array(evaluate_many(forms, ts))
    return float(np.max(_jet_sup(vals)))


def is_symmetry(Q: VectorFieldLin, ode: LinearODE, tol: float = CLASSIFY_TOL, n: int = 20) -> bool:
    return prolong_residual(Q, ode, ode.interval.chebyshev(n)) <= tol


# ---------------------------------------------------------------------------
# canonical families

DEFAULT_INTERVALS = {"constant": (-1.0, 1.0), "euler": (1.0, 2.0), "projective": (-1.0, 1.0)}


def _family_constants(r: int, c):
    c = [Fraction(v) if not isinstance(v, Expr) else v for v in c]
    if len(c) < r - 2:
        raise LinodeError(f"family of order {r} needs {r - 2} constants c_0..c_{r - 3}", code="family")
    extra = c[r - 2:]
    if any((v.value if isinstance(v, Expr) else v) != 0 for v in extra):
        raise LinodeError("constants beyond c_{r-3} must be zero", code="family")
    return [as_expr(v) for v in c[: r - 2]]


def canonical_family(kind: str, r: int, c, interval=None) -> LinearODE:
    """x^(r) + sum_{m <= r-3} q_m x^(m) = 0 for the constant, Euler or projective family."""
    if r < 3:
        raise LinodeError("canonical families need r >= 3", code="order")
    if kind not in DEFAULT_INTERVALS:
        raise LinodeError(f"unknown family {kind!r}", code="family")
    cs = _family_constants(r, c)
    span = as_interval(interval if interval is not None else DEFAULT_INTERVALS[kind])
    coeffs = [ZERO] * r
    if kind == "constant":
        for m in range(r - 2):
            coeffs[m] = cs[m]
    elif kind == "euler":
        if span.lo <= 0 <= span.hi:
            raise LinodeError("Euler equations need an interval excluding t = 0", code="interval")
        for m in range(r - 2):
            coeffs[m] = mul(cs[m], power(T, -(r - m)))
    elif kind == "projective":
        w = add(ONE, power(T, 2))
        q = [ZERO] * r
        q[r - 3] = mul(cs[r - 3], power(w, -3))
        for m in range(r - 4, -1, -1):
            inner = antiderivative(mul(power(w, r - m - 1), q[m + 1]), 0.0, span)
            q[m] = add(mul(cs[m], power(w, -(r - m))),
                       mul(const(-(m + 1) * (r - m - 1)), power(w, -(r - m)), inner))
        coeffs = q
    return LinearODE(tuple(coeffs), ZERO, span)


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class SymmetryClassification:
    dimension: int
    case: str  # generic | constant-equivalent | elementary
    witness: PointTransformation | None = None
    confidence: str = "numeric"  # exact | pattern | numeric
    diagnostics: dict = field(default_factory=dict)


def _is_const_on(e: Expr, span: Interval, tol: float = 1e-9) -> bool:
    if e.free_of_t():
        return True
    try:
        ts = span.chebyshev(24)
        v = evaluate(e, ts)
    except EvaluationError:
        return False
    ref = float(np.mean(v))
    return bool(np.max(np.abs(v - ref)) <= tol * (1 + abs(ref)))


def straightening_map(kind: str, r: int, span: Interval, s: Expr = T) -> PointTransformation:
    """Map sending the symmetry of a canonical shape to d/dt~.

    kind 'translation' keeps s; 'dilation' uses ln|s|; 'rotation' uses atan(s).
    X1 = |T'|^((r-1)/2), so rational forms stay rational.
    """
    if kind == "translation":
        Tf = s
    elif kind == "dilation":
        vals = evaluate(s, span.chebyshev(8))
        Tf = ln(s) if np.all(vals > 0) else ln(neg(s))
    elif kind == "rotation":
        Tf = atan(s)
    else:
        raise ValueError(kind)
    dT = derivative(Tf)
    sign = np.sign(evaluate(dT, span.midpoint))
    x1 = power(dT if sign > 0 else neg(dT), Fraction(r - 1, 2))
    return PointTransformation(Tf, x1, ZERO, span)


def _constant_coefficients(ode: LinearODE) -> bool:
    return all(_is_const_on(a, ode.interval) for a in ode.coeffs)


def _pattern_witness(rational: LinearODE):
    """Witness map for the three canonical shapes of a rational-form equation."""
    r = rational.order
    span = rational.interval
    if _constant_coefficients(rational):
        return "constant", identity(span)
    if not (span.lo <= 0 <= span.hi):
        scaled = [mul(power(T, r - m), rational.coeffs[m]) for m in range(r)]
        if all(_is_const_on(e, span) for e in scaled):
            return "euler", straightening_map("dilation", r, span)
    if _near_zero(rational.coeffs[r - 2], span):
        fam = None
        try:
            # family constants are the coefficient values at t = 0
            cs = [_as_constant(evaluate(rational.coeffs[m], 0.0)) for m in range(r - 2)]
            fam = canonical_family("projective", r, cs, span)
        except (EvaluationError, LinodeError):
            fam = None
        if fam is not None and all(
                equiv_numeric(a, b, span, 50, 1e-9) for a, b in zip(rational.coeffs, fam.coeffs)):
            return "projective", straightening_map("rotation", r, span)
    return None, None


def _as_constant(v: float) -> Expr:
    short = Fraction(v).limit_denominator(10 ** 9)
    return const(short if abs(float(short) - v) <= 1e-13 * (1 + abs(v)) else v)


def _near_zero(e: Expr, span: Interval) -> bool:
    try:
        return sup_norm(e, span, 24) <= 1e-9
    except EvaluationError:
        return False


def _nullspace(ode: LinearODE, n: int = 16):
    """Null space of the invariance residuals of P, D, K (columns) on ode."""
    r = ode.order
    ts = ode.interval.shrink(0.02).chebyshev(n)
    cols = []
    for Q in sl2(r).fields():
        vals = np.array(evaluate_many(residual_form(Q, ode), ts))
        cols.append(vals.reshape(-1))
    M = np.array(cols).T
    norms = np.linalg.norm(M, axis=0)
    scale = np.where(norms > 0, norms, 1.0)
    _, svals, vt = np.linalg.svd(M / scale, full_matrices=False)
    top = max(svals[0], 1e-300)
    null = [vt[i] / scale for i in range(3) if svals[i] <= NULLSPACE_TOL * top or norms.max() == 0]
    return null, svals / top


def _snap(v: np.ndarray):
    v = v / v[np.argmax(np.abs(v))]
    out = []
    for x in v:
        if abs(x) < 1e-7:
            out.append(Fraction(0))
            continue
        f = Fraction(x).limit_denominator(1000)
        out.append(f if abs(float(f) - x) < 1e-7 else Fraction(x))
    return out


def _straighten_quadratic(coef, r: int, span: Interval):
    """Witness map for tau = c0 + c1 t + c2 t^2 being a symmetry direction."""
    c0, c1, c2 = coef
    if c2 == 0 and c1 == 0:
        return straightening_map("translation", r, span)
    if c2 == 0:
        return straightening_map("dilation", r, span, add(T, const(c0 / c1)))
    disc = c1 * c1 - 4 * c0 * c2
    p = -c1 / (2 * c2)
    if abs(disc) <= 1e-9 * (c1 * c1 + abs(c0 * c2)):
        return straightening_map("translation", r, span, neg(power(add(T, const(-p)), -1)))
    if disc > 0:
        root = disc ** 0.5
        exact = Fraction(root).limit_denominator(10 ** 6)
        sq = const(exact) if float(exact) ** 2 == float(disc) and exact * exact == disc else const(root)
        rho1 = add(const(p), mul(const(Fraction(1) / (2 * c2)), sq))
        rho2 = add(const(p), mul(const(Fraction(-1) / (2 * c2)), sq))
        s = mul(add(T, neg(rho1)), power(add(T, neg(rho2)), -1))
        return straightening_map("dilation", r, span, s)
    q = (-disc) ** 0.5 / (2 * abs(c2))
    qe = Fraction(q).limit_denominator(10 ** 6)
    qx = const(qe) if abs(float(qe) - q) < 1e-14 else const(q)
    s = mul(add(T, const(-p)), power(qx, -1))
    return straightening_map("rotation", r, span, s)


def _verify_constant(tau: PointTransformation, ode: LinearODE) -> bool:
    try:
        mapped = apply_to_ode(tau, ode)
    except (LinodeError, EvaluationError):
        return False
    return all(_is_const_on(a, mapped.interval, 1e-6) for a in mapped.coeffs)


def classify_dimension(ode: LinearODE, t0=None) -> SymmetryClassification:
    r = ode.order
    if r == 2:
        return SymmetryClassification(8, "elementary", None, "exact", {"note": "every second-order equation"})
    from .gauge import to_laguerre_forsyth, to_rational

    diag = {}
    hom = ode.homogeneous_part()
    if not ode.is_homogeneous:
        diag["homogeneous-part"] = True
    try:
        lf = to_laguerre_forsyth(hom, t0)
    except (GaugeError, TransformationError) as err:
        raise GaugeError(f"classification needs the Laguerre-Forsyth gauge: {err}") from err
    gauged = lf.ode
    diag["lf-interval"] = [gauged.interval.lo, gauged.interval.hi]
    if all(a.is_zero() for a in gauged.coeffs):
        return SymmetryClassification(r + 4, "elementary", lf.transformation, "exact", diag)
    sups = [sup_norm(a, gauged.interval, 50) for a in gauged.coeffs]
    diag["lf-sup"] = max(sups)
    if max(sups) <= CLASSIFY_TOL:
        return SymmetryClassification(r + 4, "elementary", lf.transformation, "numeric", diag)

    rat = to_rational(hom)
    kind, witness = _pattern_witness(rat.ode)
    if kind is not None:
        if not rat.transformation.is_identity_structurally():
            witness = compose(witness, rat.transformation)
        diag["pattern"] = kind
        return SymmetryClassification(r + 2, "constant-equivalent", witness, "pattern", diag)

    null, svals = _nullspace(gauged)
    diag["singular-values"] = [float(s) for s in svals]
    if len(null) == 0:
        return SymmetryClassification(r + 1, "generic", None, "numeric", diag)
    if len(null) >= 2:
        # an extension by two or more of P, D, K forces x^(r) = 0
        return SymmetryClassification(r + 4, "elementary", lf.transformation, "numeric", diag)
    coef = _snap(null[0])
    diag["symmetry-tau"] = [str(c) for c in coef]
    witness = None
    try:
        straight = _straighten_quadratic(coef, r, gauged.interval).validate()
        if _verify_constant(straight, gauged):
            witness = compose(straight, lf.transformation)
    except (LinodeError, EvaluationError, ZeroDivisionError):
        witness = None
    return SymmetryClassification(r + 2, "constant-equivalent", witness, "numeric", diag)

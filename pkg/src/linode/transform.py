"""Point transformations t~ = T(t), x~ = X1(t) x + X0(t) and their action.

The action on an equation follows the chain rule: with d/dt~ = (1/T_t) d/dt,

    x~^(k) = sum_m alpha[k][m] x^(m) + beta[k],
    alpha[k+1][m] = (alpha[k][m]' + alpha[k][m-1]) / T_t,
    beta[k+1] = beta[k]' / T_t,

starting from alpha[0][0] = X1 and beta[0] = X0.  Substituting x^(r) from
the source equation and matching the coefficient of each x^(m), m < r, gives
a triangular system for the target coefficients, solved from m = r-1 down.
Everything is first built as a function of the source variable t and then
composed with the inverse of T, which is closed form when T can be peeled
into invertible elementary layers (affine, Moebius, exp, ln, atan, ...) and a
root-finding leaf otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, InverseError, SingularityError, TransformationError
from .expr import (ONE, ZERO, Expr, Interval, NumericLeaf, Program, T, add, as_expr,
                   as_interval, atan, const, derivative, evaluate, exp, leaf_call, ln,
                   mul, neg, power, serialize, substitute, tan)
from .expr.core import ADD, FUNC, MUL, POW, VAR
from .expr.poly import degree, to_rational
from .ode import LinearODE

VALIDATION_SAMPLES = 201


def _free_split(e: Expr, kind):
    """Split the operands of a sum/product into (free of t, depending on t)."""
    free, dep = [], []
    for a in e.args:
        (free if a.free_of_t() else dep).append(a)
    return free, dep


def _peel_inverse(f: Expr, y: Expr):
    """Expression s(y) with f(s(y)) = y, by undoing f layer by layer, or None.

    Branch choices are not checked here; the caller verifies the candidate.
    """
    for _ in range(64):
        if f.kind == VAR:
            return y
        if f.free_of_t():
            return None
        rat = to_rational(f, 2)
        if rat is not None and degree(rat[0]) <= 1 and degree(rat[1]) <= 1:
            num, den = rat
            a = num[1] if len(num) > 1 else 0
            b = num[0] if num else 0
            c = den[1] if len(den) > 1 else 0
            d = den[0]
            if a * d - b * c == 0:
                return None
            # y = (a s + b)/(c s + d)  =>  s = (d y - b)/(a - c y)
            return mul(add(mul(const(d), y), const(-b)), power(add(const(a), mul(const(-c), y)), -1))
        if f.kind == ADD:
            free, dep = _free_split(f, ADD)
            if len(dep) != 1:
                return None
            y = add(y, neg(add(*free)))
            f = dep[0]
            continue
        if f.kind == MUL:
            free, dep = _free_split(f, MUL)
            if len(dep) != 1:
                return None
            y = mul(y, power(mul(*free), -1))
            f = dep[0]
            continue
        if f.kind == POW:
            y = power(y, 1 / f.data)
            f = f.args[0]
            continue
        if f.kind == FUNC:
            name = f.data
            inverse = {"exp": ln, "ln": exp, "atan": tan, "tan": atan}.get(name)
            if inverse is None:
                return None
            y = inverse(y)
            f = f.args[0]
            continue
        return None
    return None


def schwarzian(Tf: Expr) -> Expr:
    """S(T) = T'''/T' - (3/2) (T''/T')^2."""
    d1 = derivative(Tf)
    d2 = derivative(d1)
    d3 = derivative(d2)
    inv = power(d1, -1)
    return add(mul(d3, inv), mul(const("-3/2"), power(mul(d2, inv), 2)))


class _InverseEvaluator:
    """Inverse of a monotone function by table lookup and safeguarded Newton."""

    def __init__(self, Tf: Expr, source: Interval, nodes: int = 257):
        self.prog = Program([Tf, derivative(Tf)])
        self.source = source
        ts = np.unique(np.concatenate([source.linspace(nodes), source.chebyshev(nodes)]))
        vals = self.prog(ts)[0]
        self.increasing = vals[-1] > vals[0]
        if self.increasing:
            self.tab_y, self.tab_t = vals, ts
        else:
            self.tab_y, self.tab_t = vals[::-1], ts[::-1]
        if np.any(np.diff(self.tab_y) <= 0):
            raise InverseError("function is not strictly monotone on its interval")

    def __call__(self, y, k):
        y = np.asarray(y, dtype=float)
        flat = y.reshape(-1)
        ty, tt = self.tab_y, self.tab_t
        idx = np.clip(np.searchsorted(ty, flat), 1, len(ty) - 1)
        a, b = tt[idx - 1], tt[idx]
        lo_b, hi_b = np.minimum(a, b), np.maximum(a, b)
        s = np.interp(flat, ty, tt)
        scale = self.source.width
        for _ in range(30):
            fv, dv = self.prog(s)
            step = (fv - flat) / dv
            s_new = np.clip(s - step, lo_b, hi_b)
            done = np.abs(s_new - s) <= 4e-16 * max(scale, 1.0) + 1e-300
            s = s_new
            if np.all(done):
                break
        return s.reshape(y.shape)


@dataclass(frozen=True)
class PointTransformation:
    """t~ = T(t), x~ = X1(t) x + X0(t) on a source interval."""

    T: Expr
    X1: Expr
    X0: Expr
    interval: Interval
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "T", as_expr(self.T))
        object.__setattr__(self, "X1", as_expr(self.X1))
        object.__setattr__(self, "X0", as_expr(self.X0))
        object.__setattr__(self, "interval", as_interval(self.interval))

    # -- basic structure -------------------------------------------------------
    @property
    def source(self) -> Interval:
        return self.interval

    @property
    def T_t(self) -> Expr:
        return derivative(self.T)

    @property
    def target(self) -> Interval:
        if "target" not in self._cache:
            a, b = (float(v) for v in Program([self.T])(np.array([self.interval.lo, self.interval.hi]))[0])
            self._cache["target"] = Interval(min(a, b), max(a, b))
        return self._cache["target"]

    def is_identity_structurally(self) -> bool:
        return self.T is T and self.X1.is_one() and self.X0.is_zero()

    def restrict(self, interval) -> "PointTransformation":
        span = as_interval(interval)
        if span == self.interval:
            return self
        if not self.interval.contains_interval(span):
            raise TransformationError(
                f"transformation defined on {self.interval} cannot act on {span}", code="interval")
        return PointTransformation(self.T, self.X1, self.X0, span)

    def validate(self, n: int = VALIDATION_SAMPLES):
        """Check T_t != 0 and X1 != 0 with constant sign on sample points."""
        ts = np.unique(np.concatenate([self.interval.linspace(n), self.interval.chebyshev(n)]))
        try:
            tt, x1 = Program([self.T_t, self.X1])(ts)
        except EvaluationError as err:
            raise TransformationError(f"transformation not evaluable on {self.interval}: {err}",
                                      code="unevaluable") from err
        scale_t = max(np.max(np.abs(tt)), 1e-300)
        if np.any(np.abs(tt) <= 1e-12 * scale_t) or not (np.all(tt > 0) or np.all(tt < 0)):
            bad = ts[np.argmin(np.abs(tt))]
            raise TransformationError(f"T_t vanishes near t = {float(bad)!r}", code="vanishing-jacobian")
        scale_x = max(np.max(np.abs(x1)), 1e-300)
        if np.any(np.abs(x1) <= 1e-12 * scale_x) or not (np.all(x1 > 0) or np.all(x1 < 0)):
            bad = ts[np.argmin(np.abs(x1))]
            raise TransformationError(f"X1 vanishes near t = {float(bad)!r}", code="vanishing-x1")
        return self

    # -- inverse of T ------------------------------------------------------------
    def inverse_T(self) -> Expr:
        """S with T(S(y)) = y on the target interval."""
        if "inverse" not in self._cache:
            self._cache["inverse"] = invert_function(self.T, self.interval)
        return self._cache["inverse"]

    def to_document(self, rename=None) -> str:
        return (f"T = {serialize(self.T, rename)}\nX1 = {serialize(self.X1, rename)}\n"
                f"X0 = {serialize(self.X0, rename)}\ninterval = {self.interval}\n")

    def __str__(self):
        return self.to_document()


def identity(interval) -> PointTransformation:
    return PointTransformation(T, ONE, ZERO, interval)


def _verify_inverse(Tf: Expr, S: Expr, source: Interval, target: Interval) -> bool:
    ys = target.chebyshev(24)
    try:
        s = evaluate(S, ys)
        back = evaluate(Tf, np.clip(s, source.lo, source.hi))
    except EvaluationError:
        return False
    pad = 1e-9 * max(1.0, source.width)
    if np.any(s < source.lo - pad) or np.any(s > source.hi + pad):
        return False
    return bool(np.max(np.abs(back - ys)) <= 1e-10 * (1.0 + np.max(np.abs(ys))))


def invert_function(Tf: Expr, source: Interval) -> Expr:
    """Inverse of a monotone T on ``source`` as an expression on the image."""
    Tf = as_expr(Tf)
    if Tf is T:
        return T
    vals = Program([Tf])(np.array([source.lo, source.hi]))[0]
    target = Interval(min(vals), max(vals))
    if not Tf.has_leaves():
        cand = _peel_inverse(Tf, T)
        if cand is not None and _verify_inverse(Tf, cand, source, target):
            return cand
    try:
        evaluator = _InverseEvaluator(Tf, source)
    except EvaluationError as err:
        raise InverseError(f"cannot tabulate T on {source}: {err}") from err
    leaf = NumericLeaf("inv", target, 1, evaluator,
                       provenance={"kind": "inverse", "of": serialize(Tf), "source": str(source)})
    s_call = leaf_call(leaf, 0)
    leaf.set_relation(power(substitute(derivative(Tf), s_call), -1))
    return s_call


# ---------------------------------------------------------------------------
# action on equations and solutions

def chain_coefficients(tau: PointTransformation, r: int):
    """alpha[k][m] and beta[k] for k <= r, as functions of the source t."""
    inv_tt = power(tau.T_t, -1)
    alpha = [[tau.X1]]
    beta = [tau.X0]
    for k in range(r):
        row = []
        prev = alpha[k]
        for m in range(k + 2):
            d = derivative(prev[m]) if m <= k else ZERO
            shifted = prev[m - 1] if m >= 1 else ZERO
            row.append(mul(add(d, shifted), inv_tt))
        alpha.append(row)
        beta.append(mul(derivative(beta[k]), inv_tt))
    return alpha, beta


def transformed_coefficients_in_source(tau: PointTransformation, ode: LinearODE):
    """(a~_0, ..., a~_{r-1}, b~) as functions of the source variable t."""
    r = ode.order
    alpha, beta = chain_coefficients(tau, r)
    new = [None] * r
    for m in range(r - 1, -1, -1):
        acc = [alpha[r][m], neg(mul(alpha[r][r], ode.coeffs[m]))]
        for k in range(m + 1, r):
            acc.append(mul(new[k], alpha[k][m]))
        new[m] = neg(mul(add(*acc), power(alpha[m][m], -1)))
    rhs = [mul(alpha[r][r], ode.rhs), beta[r]]
    for k in range(r):
        rhs.append(mul(new[k], beta[k]))
    return new, add(*rhs)


def _prepare(tau: PointTransformation, interval: Interval) -> PointTransformation:
    if not tau.interval.contains_interval(interval):
        raise TransformationError(
            f"transformation interval {tau.interval} does not contain {interval}", code="interval")
    sub = tau.restrict(Interval(max(interval.lo, tau.interval.lo), min(interval.hi, tau.interval.hi)))
    return sub.validate()


def apply_to_ode(tau: PointTransformation, ode: LinearODE) -> LinearODE:
    """The monic equation satisfied by x~(t~) whenever x(t) solves ``ode``."""
    if tau.is_identity_structurally():
        return ode
    tau = _prepare(tau, ode.interval)
    coeffs, rhs = transformed_coefficients_in_source(tau, ode)
    S = tau.inverse_T()
    return LinearODE(tuple(substitute(a, S) for a in coeffs), substitute(rhs, S), tau.target)


def transport_solution(tau: PointTransformation, x) -> Expr:
    """x~(t~) = X1(S) x(S) + X0(S) with S the inverse of T."""
    x = as_expr(x)
    S = tau.inverse_T()
    return substitute(add(mul(tau.X1, x), tau.X0), S)


def compose(tau2: PointTransformation, tau1: PointTransformation) -> PointTransformation:
    """tau2 after tau1."""
    if not tau2.interval.contains_interval(tau1.target, 1e-8):
        raise TransformationError(
            f"image {tau1.target} of the first map is not inside {tau2.interval}", code="interval")
    X12 = substitute(tau2.X1, tau1.T)
    return PointTransformation(
        substitute(tau2.T, tau1.T),
        mul(X12, tau1.X1),
        add(mul(X12, tau1.X0), substitute(tau2.X0, tau1.T)),
        tau1.interval,
    )


def invert(tau: PointTransformation) -> PointTransformation:
    S = tau.inverse_T()
    x1 = substitute(tau.X1, S)
    return PointTransformation(S, power(x1, -1), neg(mul(substitute(tau.X0, S), power(x1, -1))),
                               tau.target)


def mobius(alpha, beta, gamma, delta, C, r: int, interval, X0=ZERO) -> PointTransformation:
    """T = (alpha t + beta)/(gamma t + delta), X1 = C/(gamma t + delta)^(r-1)."""
    den = add(mul(const(gamma), T), const(delta))
    Tf = mul(add(mul(const(alpha), T), const(beta)), power(den, -1))
    return PointTransformation(Tf, mul(const(C), power(den, -(r - 1))), X0, interval)

"""Exact differentiation and substitution of ``t``."""

from __future__ import annotations

from .core import (ADD, CONST, FUNC, LEAF, MUL, ONE, POW, VAR, ZERO, Expr, add,
                   as_expr, const, cos, func, leaf_call, mul, power, rebuild,
                   sin, topological)


def _d1(node: Expr, d) -> Expr:
    kind = node.kind
    if kind == CONST:
        return ZERO
    if kind == VAR:
        return ONE
    if kind == ADD:
        return add(*[d[a] for a in node.args])
    if kind == MUL:
        terms = []
        args = node.args
        for i, a in enumerate(args):
            da = d[a]
            if da.is_zero():
                continue
            terms.append(mul(da, *(args[:i] + args[i + 1:])))
        return add(*terms)
    if kind == POW:
        base = node.args[0]
        ex = node.data
        db = d[base]
        if db.is_zero():
            return ZERO
        return mul(const(ex), power(base, ex - 1), db)
    if kind == FUNC:
        u = node.args[0]
        du = d[u]
        if du.is_zero():
            return ZERO
        name = node.data
        if name == "exp":
            return mul(node, du)
        if name == "ln":
            return mul(du, power(u, -1))
        if name == "sin":
            return mul(cos(u), du)
        if name == "cos":
            return mul(const(-1), sin(u), du)
        if name == "tan":
            return mul(du, power(cos(u), -2))
        if name == "atan":
            return mul(du, power(add(ONE, power(u, 2)), -1))
        if name == "abs":
            return mul(u, du, power(func("abs", u), -1))
        raise AssertionError(name)
    if kind == LEAF:
        leaf, k = node.data
        arg = node.args[0]
        da = d[arg]
        if da.is_zero():
            return ZERO
        return mul(leaf_call(leaf, k + 1, arg), da)
    raise AssertionError(kind)


def derivative(e: Expr) -> Expr:
    """First derivative d e / dt, cached on the node."""
    e = as_expr(e)
    if e._d1 is not None:
        return e._d1
    d = {}
    for node in topological(e):
        if node._d1 is None:
            node._d1 = _d1(node, d)
        d[node] = node._d1
    return e._d1


def differentiate(e: Expr, k: int = 1) -> Expr:
    """k-th derivative.  Raises DerivativeOrderError past a leaf's declared order."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    e = as_expr(e)
    for _ in range(k):
        e = derivative(e)
    return e


def derivatives(e: Expr, k: int):
    """[e, e', ..., e^(k)]."""
    out = [as_expr(e)]
    for _ in range(k):
        out.append(derivative(out[-1]))
    return out


def substitute(e: Expr, arg) -> Expr:
    """e with t replaced by the expression ``arg`` (function composition e∘arg)."""
    e = as_expr(e)
    arg = as_expr(arg)
    if arg.kind == VAR:
        return e
    memo = {}
    for node in topological(e):
        if node.kind == VAR:
            memo[node] = arg
        elif node.kind == CONST:
            memo[node] = node
        else:
            memo[node] = rebuild(node, [memo[a] for a in node.args])
    return memo[e]

"""Exact polynomials and rational functions over Q in the variable t.

Polynomials are tuples of ``Fraction`` coefficients, lowest degree first,
with no trailing zeros (the zero polynomial is ``()``).  ``to_rational``
recognizes expressions that are rational functions of t with rational
coefficients, which lets the rest of the package take exact shortcuts
(antiderivatives, Moebius detection, constant checks).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .core import ADD, CONST, MUL, POW, VAR, Expr, add, const, mul, power, T, topological

Poly = tuple


def trim(p) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(Fraction(c) for c in p)


def degree(p: Poly) -> int:
    return len(p) - 1


def padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def pneg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, pneg(q))


def pscale(p: Poly, c) -> Poly:
    return trim([c * a for a in p])


def pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def ppow(p: Poly, n: int) -> Poly:
    out = (Fraction(1),)
    for _ in range(n):
        out = pmul(out, p)
    return out


def pdivmod(p: Poly, q: Poly):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = q[-1]
    for k in range(len(p) - len(q), -1, -1):
        c = rem[k + len(q) - 1] / lead
        quot[k] = c
        if c:
            for j, b in enumerate(q):
                rem[k + j] -= c * b
    return trim(quot), trim(rem[: len(q) - 1])


def pmonic(p: Poly) -> Poly:
    return pscale(p, 1 / p[-1]) if p else p


def pgcd(p: Poly, q: Poly) -> Poly:
    while q:
        p, q = q, pdivmod(p, q)[1]
    return pmonic(p)


def pderiv(p: Poly) -> Poly:
    return trim([i * c for i, c in enumerate(p)][1:])


def pinteg(p: Poly) -> Poly:
    """Antiderivative vanishing at 0."""
    return trim([Fraction(0)] + [c / (i + 1) for i, c in enumerate(p)])


def peval(p: Poly, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def pcompose(p: Poly, q: Poly) -> Poly:
    out: Poly = ()
    for c in reversed(p):
        out = padd(pmul(out, q), (c,) if c else ())
    return out


def _divisors(n: int):
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
        if i > 100000:
            break
    return small + large[::-1]


def rational_roots(p: Poly):
    """Distinct rational roots with multiplicities."""
    p = trim(p)
    roots = []
    if degree(p) < 1:
        return roots
    while p and p[0] == 0:
        p = p[1:]
        roots.append(Fraction(0))
    if roots:
        roots = [(Fraction(0), len(roots))]
    if degree(p) < 1:
        return roots
    lcm = 1
    for c in p:
        lcm = lcm * c.denominator // gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in p]
    for num in _divisors(ints[0]):
        for den in _divisors(ints[-1]):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if degree(p) < 1:
                    return roots
                if peval(p, cand) != 0:
                    continue
                mult = 0
                lin = (-cand, Fraction(1))
                while degree(p) >= 1 and peval(p, cand) == 0:
                    p = pdivmod(p, lin)[0]
                    mult += 1
                roots.append((cand, mult))
    return roots


def poly_expr(p: Poly, var: Expr = T) -> Expr:
    terms = [mul(const(c), power(var, i)) for i, c in enumerate(p) if c]
    return add(*terms)


def rational_expr(num: Poly, den: Poly, var: Expr = T) -> Expr:
    return mul(poly_expr(num, var), power(poly_expr(den, var), -1))


# ---------------------------------------------------------------------------
# recognition

def _rat_mul(a, b):
    return pmul(a[0], b[0]), pmul(a[1], b[1])


def _rat_add(a, b):
    if a[1] == b[1]:
        return padd(a[0], b[0]), a[1]
    return padd(pmul(a[0], b[1]), pmul(b[0], a[1])), pmul(a[1], b[1])


def _rat_reduce(r):
    num, den = r
    if not num:
        return (), (Fraction(1),)
    g = pgcd(num, den)
    if degree(g) > 0:
        num = pdivmod(num, g)[0]
        den = pdivmod(den, g)[0]
    lead = den[-1]
    return pscale(num, 1 / lead), pscale(den, 1 / lead)


def to_rational(e: Expr, max_degree: int = 64):
    """(num, den) with e == num/den and den monic, or None if e is not a
    rational function of t with rational coefficients."""
    memo = {}
    for node in topological(e):
        kind = node.kind
        if kind == CONST:
            r = (trim([node.data]), (Fraction(1),))
        elif kind == VAR:
            r = ((Fraction(0), Fraction(1)), (Fraction(1),))
        elif kind == ADD:
            r = memo[node.args[0]]
            for a in node.args[1:]:
                r = _rat_add(r, memo[a])
            r = _rat_reduce(r)
        elif kind == MUL:
            r = memo[node.args[0]]
            for a in node.args[1:]:
                r = _rat_mul(r, memo[a])
            r = _rat_reduce(r)
        elif kind == POW and node.data.denominator == 1:
            num, den = memo[node.args[0]]
            n = int(node.data)
            if n < 0:
                if not num:
                    return None
                num, den, n = den, num, -n
            if (max(degree(num), degree(den)) * n) > max_degree:
                return None
            r = _rat_reduce((ppow(num, n), ppow(den, n)))
        else:
            return None
        if r is None or max(degree(r[0]), degree(r[1])) > max_degree:
            return None
        memo[node] = r
    return memo[e]


def to_poly(e: Expr, max_degree: int = 64):
    r = to_rational(e, max_degree)
    if r is None or degree(r[1]) != 0:
        return None
    return pscale(r[0], 1 / r[1][0])

"""Canonical text form of expressions.

The output is accepted by ``linode.parse.parse_expression`` for every
expression free of numeric leaves.  Leaves print as ``@name`` followed by one
prime per derivative and the argument, e.g. ``@lf3''(t)``; the parser rejects
them on purpose since their data cannot travel through text.
"""

from __future__ import annotations

from fractions import Fraction

from .core import ADD, CONST, FUNC, LEAF, MUL, POW, VAR, Expr

# binding strength of the printed top-level operator
_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = range(5)


def _fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _const_prec(c: Fraction) -> int:
    if c < 0:
        return _UNARY
    if c.denominator != 1:
        return _PRODUCT
    return _ATOM


def _wrap(text, prec, need):
    return f"({text})" if prec < need else text


def _exponent(ex: Fraction) -> str:
    if ex.denominator == 1 and ex >= 0:
        return str(ex.numerator)
    return f"({_fraction(ex)})"


def _render(e: Expr, memo) -> tuple[str, int]:
    if e in memo:
        return memo[e]
    kind = e.kind
    if kind == CONST:
        out = (_fraction(e.data), _const_prec(e.data))
    elif kind == VAR:
        out = ("t", _ATOM)
    elif kind == FUNC:
        out = (f"{e.data}({_render(e.args[0], memo)[0]})", _ATOM)
    elif kind == LEAF:
        leaf, k = e.data
        name = memo.rename(leaf) if memo.rename else leaf.name
        out = (f"@{name}{chr(39) * k}({_render(e.args[0], memo)[0]})", _ATOM)
    elif kind == POW:
        out = _render_power(e.args[0], e.data, memo)
    elif kind == MUL:
        out = _render_product(e, memo)
    elif kind == ADD:
        out = _render_sum(e, memo)
    else:  # pragma: no cover
        raise AssertionError(kind)
    memo[e] = out
    return out


def _render_power(base: Expr, ex: Fraction, memo):
    if ex < 0:
        body, prec = _render_power(base, -ex, memo)
        return f"1/{_wrap(body, prec, _POWER)}", _PRODUCT
    if ex == 1:
        return _render(base, memo)
    btext, bprec = _render(base, memo)
    return f"{_wrap(btext, bprec, _ATOM)}^{_exponent(ex)}", _POWER


def _render_product(e: Expr, memo):
    args = list(e.args)
    coeff = Fraction(1)
    if args[0].kind == CONST:
        coeff = args.pop(0).data
    num, den = [], []
    for f in args:
        if f.kind == POW and f.data < 0:
            den.append(_render_power(f.args[0], -f.data, memo))
        else:
            num.append(_render(f, memo))
    sign = ""
    if coeff < 0:
        sign = "-"
        coeff = -coeff
    parts = []
    if coeff.numerator != 1 or not num:
        parts.append(str(coeff.numerator))
    parts.extend(_wrap(txt, p, _UNARY) for txt, p in num)
    text = "*".join(parts)
    if coeff.denominator != 1:
        den.insert(0, (str(coeff.denominator), _ATOM))
    # chained divisions: a grouped denominator (4*(1 + t)) would reparse with
    # the constant distributed over the sum
    for txt, p in den:
        text = f"{text}/{_wrap(txt, p, _POWER)}"
    if sign:
        return f"-{text}", _UNARY
    return text, _PRODUCT


def _render_sum(e: Expr, memo):
    pieces = []
    for i, term in enumerate(e.args):
        text, prec = _render(term, memo)
        if i == 0:
            pieces.append(text)
            continue
        if text.startswith("-") and prec == _UNARY:
            pieces.append(f" - {text[1:]}")
        else:
            pieces.append(f" + {_wrap(text, prec, _PRODUCT)}")
    return "".join(pieces), _SUM


class _Memo(dict):
    def __init__(self, rename=None):
        super().__init__()
        self.rename = rename


def serialize(e: Expr, rename=None) -> str:
    """Text form of e; ``rename(leaf)`` optionally replaces leaf names."""
    return _render(e, _Memo(rename))[0]


class LeafNames:
    """Per-output leaf names (prefix plus order of first appearance), so that
    printed text does not depend on how many leaves a process created before."""

    def __init__(self):
        self._names = {}
        self._counts = {}

    def __call__(self, leaf) -> str:
        key = id(leaf)
        if key not in self._names:
            n = self._counts.get(leaf.prefix, 0) + 1
            self._counts[leaf.prefix] = n
            self._names[key] = f"{leaf.prefix}{n}"
            self._names[("keep", key)] = leaf
        return self._names[key]

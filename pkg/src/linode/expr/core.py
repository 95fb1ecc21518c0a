"""Expression nodes in the single variable ``t``.

Nodes are immutable and hash-consed: structurally equal expressions built
through the constructors in this module are the *same* object, so ``is`` and
``==`` coincide and DAG sharing is automatic.  The constructors apply a fixed
rewrite system, which is what ``normalize`` means in this package:

* sums and products are flattened and their rational constants combined;
* like terms ``c1*X + c2*X`` are collected and equal bases in a product have
  their exponents added (``X^a * X^b -> X^(a+b)``);
* a common non-constant factor of every term of a sum is pulled out;
* a rational constant multiplying a single sum is distributed over it;
* integer powers of products are distributed, powers of powers are merged
  where that is valid over the reals (``(u^2)^(1/2) -> |u|``);
* elementary functions fold at exact constant arguments
  (``exp(0)``, ``ln(1)``, ``sin(0)``, ...) and cancel against their inverse
  (``ln(exp(u)) -> u``, ``exp(c*ln(u)) -> u^c``);
* operands of sums and products are sorted by a deterministic key.

No completeness is claimed; numeric comparison backs structural equality.
"""

from __future__ import annotations

import threading
import weakref
import zlib
from fractions import Fraction
from numbers import Rational

CONST, VAR, ADD, MUL, POW, FUNC, LEAF = range(7)

FUNCTIONS = ("exp", "ln", "sin", "cos", "tan", "atan", "abs")
_FUNC_IDS = {name: i for i, name in enumerate(FUNCTIONS)}

_table = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Expr:
    """A node of an expression DAG.  Build through the module constructors."""

    __slots__ = ("kind", "args", "data", "_hash", "_d1", "_topo", "_prog", "__weakref__")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __ne__(self, other):
        return self is not other

    def __reduce__(self):
        raise TypeError("expressions are process-local; serialize them as text")

    # arithmetic sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __repr__(self):
        from .printer import serialize

        return f"Expr({serialize(self)!r})"

    def __str__(self):
        from .printer import serialize

        return serialize(self)

    # structure helpers ----------------------------------------------------
    @property
    def is_const(self):
        return self.kind == CONST

    @property
    def value(self) -> Fraction:
        if self.kind != CONST:
            raise TypeError("not a constant")
        return self.data

    def is_zero(self):
        return self.kind == CONST and self.data == 0

    def is_one(self):
        return self.kind == CONST and self.data == 1

    def has_leaves(self):
        return any(n.kind == LEAF for n in topological(self))

    def free_of_t(self):
        return not any(n.kind in (VAR, LEAF) for n in topological(self))

    def leaves(self):
        """Numeric leaves referenced anywhere in the expression."""
        seen = []
        for n in topological(self):
            if n.kind == LEAF and n.data[0] not in seen:
                seen.append(n.data[0])
        return seen


def _data_hash(kind, data):
    if data is None:
        return 0
    if kind == FUNC:
        return _FUNC_IDS[data]
    if kind == LEAF:
        leaf, k = data
        return hash((leaf.stable_hash, k))
    return hash(data)


def _intern(kind, data, args=()):
    key = (kind, data, args)
    with _lock:
        node = _table.get(key)
        if node is not None:
            return node
        node = Expr.__new__(Expr)
        node.kind = kind
        node.data = data
        node.args = args
        node._hash = hash((kind, _data_hash(kind, data)) + tuple(a._hash for a in args))
        node._d1 = None
        node._topo = None
        node._prog = None
        _table[key] = node
        return node


def topological(e: Expr):
    """Nodes of the DAG rooted at ``e`` in dependency order (children first)."""
    if e._topo is not None:
        return e._topo
    order = []
    seen = set()
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        if node.kind == LEAF:
            stack.append((node.args[0], False))
        else:
            for a in reversed(node.args):
                if id(a) not in seen:
                    stack.append((a, False))
    # a node may have been appended before all parents saw it; dedupe keeps the first
    result = []
    placed = set()
    for n in order:
        if id(n) not in placed:
            placed.add(id(n))
            result.append(n)
    e._topo = tuple(result)
    return e._topo


def sort_key(e: Expr):
    if e.kind == CONST:
        return (0, e.data, 0)
    if e.kind == VAR:
        return (1, 0, 0)
    return (2 + e.kind, 0, e._hash)


# ---------------------------------------------------------------------------
# atoms

def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("non-finite constant")
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return Fraction(int(v))
        if isinstance(v, np.floating):
            return Fraction(float(v))
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"cannot make a constant from {type(v).__name__}")


def const(v) -> Expr:
    return _intern(CONST, _to_fraction(v))


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return const(v)


T = _intern(VAR, None)
ZERO = const(0)
ONE = const(1)
MINUS_ONE = const(-1)


# ---------------------------------------------------------------------------
# sums

def _split_coeff(e: Expr):
    """(c, rest) with e == c*rest; rest is None for constants."""
    if e.kind == CONST:
        return e.data, None
    if e.kind == MUL and e.args[0].kind == CONST:
        rest = e.args[1:]
        if len(rest) == 1:
            return e.args[0].data, rest[0]
        return e.args[0].data, _intern(MUL, None, rest)
    return Fraction(1), e


def _factors(e: Expr):
    """Multiplicative factors as (base, exponent) pairs, constants excluded."""
    if e.kind == MUL:
        items = e.args
    else:
        items = (e,)
    out = []
    for f in items:
        if f.kind == CONST:
            continue
        if f.kind == POW:
            out.append((f.args[0], f.data))
        else:
            out.append((f, Fraction(1)))
    return out


def _common_factor(terms):
    """Largest non-constant factor shared by every term (integer exponents of
    one sign only), or None."""
    if len(terms) < 2:
        return None
    first = _factors(terms[0])
    if not first:
        return None
    common = {}
    for base, ex in first:
        if ex.denominator == 1:
            common[base] = ex
    if not common:
        return None
    for term in terms[1:]:
        fs = dict(_factors(term))
        for base in list(common):
            ex = fs.get(base)
            if ex is None or ex.denominator != 1:
                del common[base]
                continue
            cur = common[base]
            if (cur > 0) != (ex > 0):
                del common[base]
                continue
            common[base] = min(cur, ex) if cur > 0 else max(cur, ex)
        if not common:
            return None
    return common


def add(*args) -> Expr:
    coeffs = {}
    order = []
    constant = Fraction(0)
    stack = list(args)
    while stack:
        a = as_expr(stack.pop(0))
        if a.kind == ADD:
            stack[0:0] = list(a.args)
            continue
        c, rest = _split_coeff(a)
        if rest is None:
            constant += c
            continue
        if rest in coeffs:
            coeffs[rest] += c
        else:
            coeffs[rest] = c
            order.append(rest)
    terms = []
    for rest in order:
        c = coeffs[rest]
        if c == 0:
            continue
        terms.append(rest if c == 1 else _scale(c, rest))
    if constant != 0:
        terms.append(const(constant))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    common = None if constant != 0 else _common_factor(terms)
    if common:
        factor = mul(*[power(b, -ex) for b, ex in common.items()])
        inner = add(*[mul(term, factor) for term in terms])
        return mul(*[power(b, ex) for b, ex in common.items()], inner)
    terms.sort(key=sort_key)
    return _intern(ADD, None, tuple(terms))


def _scale(c: Fraction, rest: Expr) -> Expr:
    if rest.kind == MUL:
        return _intern(MUL, None, (const(c),) + rest.args)
    return _intern(MUL, None, (const(c), rest))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


# ---------------------------------------------------------------------------
# products

def mul(*args) -> Expr:
    coeff = Fraction(1)
    exps = {}
    order = []
    stack = [as_expr(a) for a in args]
    while stack:
        a = stack.pop()
        if a.kind == MUL:
            stack.extend(a.args)
            continue
        if a.kind == CONST:
            coeff *= a.data
            continue
        if a.kind == POW:
            base, ex = a.args[0], a.data
        else:
            base, ex = a, Fraction(1)
        if base in exps:
            exps[base] += ex
        else:
            exps[base] = ex
            order.append(base)
    if coeff == 0:
        return ZERO
    factors = []
    for base in order:
        ex = exps[base]
        if ex == 0:
            continue
        f = power(base, ex)
        if f.kind == CONST:
            coeff *= f.data
        elif f.kind == MUL:
            for g in f.args:
                if g.kind == CONST:
                    coeff *= g.data
                else:
                    factors.append(g)
        else:
            factors.append(f)
    if coeff == 0:
        return ZERO
    # merging can expose equal bases again, e.g. (u^2)^(1/2) and |u|
    bases = [f.args[0] if f.kind == POW else f for f in factors]
    if len(set(bases)) != len(bases):
        return mul(const(coeff), *factors)
    if not factors:
        return const(coeff)
    if len(factors) == 1:
        f = factors[0]
        if coeff == 1:
            return f
        if f.kind == ADD:
            return add(*[mul(const(coeff), term) for term in f.args])
        return _intern(MUL, None, (const(coeff), f))
    factors.sort(key=sort_key)
    if coeff != 1:
        factors.insert(0, const(coeff))
    return _intern(MUL, None, tuple(factors))


def div(a, b) -> Expr:
    return mul(as_expr(a), power(as_expr(b), -1))


# ---------------------------------------------------------------------------
# powers

def _int_root(n: int, k: int):
    if n < 0:
        if k % 2 == 0:
            return None
        r = _int_root(-n, k)
        return -r if r is not None else None
    if n < 2:
        return n
    r = int(round(n ** (1.0 / k)))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    # float root may be off for huge n; refine with integer Newton
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x ** k == n else None


def _const_power(c: Fraction, ex: Fraction):
    """c**ex as a Fraction if it is rational, else None."""
    if ex.denominator == 1:
        if c == 0 and ex < 0:
            raise ZeroDivisionError("0 to a negative power")
        return c ** int(ex)
    if c < 0:
        return None
    num = _int_root(c.numerator, ex.denominator)
    den = _int_root(c.denominator, ex.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** ex.numerator


def power(base, exponent) -> Expr:
    base = as_expr(base)
    ex = _to_fraction(exponent) if not isinstance(exponent, Expr) else exponent
    if isinstance(ex, Expr):
        if ex.kind != CONST:
            raise TypeError("only rational exponents are supported")
        ex = ex.data
    if ex == 0:
        return ONE
    if ex == 1:
        return base
    if base.kind == CONST:
        c = base.data
        if c == 1:
            return ONE
        v = _const_power(c, ex)
        if v is not None:
            return const(v)
        if c > 0:
            whole = ex.numerator // ex.denominator
            frac = ex - whole
            if whole != 0:
                return mul(const(c ** whole), _intern(POW, frac, (base,)))
        return _intern(POW, ex, (base,))
    if base.kind == POW:
        inner_base, inner_ex = base.args[0], base.data
        if ex.denominator == 1:
            return power(inner_base, inner_ex * ex)
        if inner_ex.denominator == 1 and inner_ex % 2 == 0:
            return power(func("abs", inner_base), inner_ex * ex)
        return power(inner_base, inner_ex * ex)
    if base.kind == MUL:
        if ex.denominator == 1:
            return mul(*[power(f, ex) for f in base.args])
        c = base.args[0]
        if c.kind == CONST and c.data > 0:
            return mul(power(c, ex), power(mul(*base.args[1:]), ex))
    if base.kind == FUNC:
        name = base.data
        if name == "abs" and ex.denominator == 1 and ex % 2 == 0:
            return power(base.args[0], ex)
        if name == "exp" and ex.denominator == 1:
            pass  # keep exp(u)^n so products can cancel against exp(u)
    return _intern(POW, ex, (base,))


def sqrt(e) -> Expr:
    return power(as_expr(e), Fraction(1, 2))


# ---------------------------------------------------------------------------
# elementary functions

def _ln_pattern(e: Expr):
    """(c, u) if e == c*ln(u)."""
    c, rest = _split_coeff(e)
    if rest is not None and rest.kind == FUNC and rest.data == "ln":
        return c, rest.args[0]
    return None


def func(name: str, arg) -> Expr:
    if name not in _FUNC_IDS:
        raise ValueError(f"unknown function {name!r}")
    a = as_expr(arg)
    if a.kind == CONST:
        c = a.data
        if c == 0:
            folded = {"exp": ONE, "sin": ZERO, "cos": ONE, "tan": ZERO, "atan": ZERO, "abs": ZERO}
            if name in folded:
                return folded[name]
        if name == "ln" and c == 1:
            return ZERO
        if name == "abs":
            return const(abs(c))
    if name == "ln" and a.kind == FUNC and a.data == "exp":
        return a.args[0]
    if name == "exp":
        if a.kind == FUNC and a.data == "ln":
            return a.args[0]
        pat = _ln_pattern(a)
        if pat is not None:
            return power(pat[1], pat[0])
        if a.kind == ADD:
            # exp(A + c*ln(u)) -> exp(A) * u^c
            logs, others = [], []
            for term in a.args:
                p = _ln_pattern(term)
                (others if p is None else logs).append(term if p is None else p)
            if logs:
                return mul(func("exp", add(*others)), *[power(u, c) for c, u in logs])
    if name == "abs":
        if a.kind == FUNC and a.data in ("abs", "exp"):
            return a
        if a.kind == MUL and a.args[0].kind == CONST:
            c = a.args[0].data
            rest = mul(*a.args[1:])
            return mul(const(abs(c)), func("abs", rest))
        if a.kind == POW and a.data.denominator == 1 and a.data % 2 == 0:
            return a
        if a.kind == POW and a.data.denominator != 1:
            return a  # defined only for a positive base
    if name in ("sin", "tan", "atan") and a.kind == MUL and a.args[0].kind == CONST and a.args[0].data < 0:
        return neg(func(name, neg(a)))
    if name == "cos" and a.kind == MUL and a.args[0].kind == CONST and a.args[0].data < 0:
        return func(name, neg(a))
    return _intern(FUNC, name, (a,))


def exp(e):
    return func("exp", e)


def ln(e):
    return func("ln", e)


def sin(e):
    return func("sin", e)


def cos(e):
    return func("cos", e)


def tan(e):
    return func("tan", e)


def atan(e):
    return func("atan", e)


def absolute(e):
    return func("abs", e)


# ---------------------------------------------------------------------------
# numeric leaves

def leaf_call(leaf, k: int, arg=None) -> Expr:
    """k-th derivative of a numeric leaf evaluated at ``arg`` (default t)."""
    arg = T if arg is None else as_expr(arg)
    if k < leaf.stored:
        return _intern(LEAF, (leaf, k), (arg,))
    d = leaf.derivative_expr(k)
    if arg is T:
        return d
    from .calculus import substitute

    return substitute(d, arg)


# ---------------------------------------------------------------------------

def rebuild(e: Expr, children) -> Expr:
    """Reconstruct a node of the same kind over new children."""
    k = e.kind
    if k in (CONST, VAR):
        return e
    if k == ADD:
        return add(*children)
    if k == MUL:
        return mul(*children)
    if k == POW:
        return power(children[0], e.data)
    if k == FUNC:
        return func(e.data, children[0])
    if k == LEAF:
        leaf, order = e.data
        return leaf_call(leaf, order, children[0])
    raise AssertionError(k)


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the canonicalizing constructors."""
    memo = {}
    for node in topological(e):
        if node.kind in (CONST, VAR):
            memo[node] = node
        else:
            memo[node] = rebuild(node, [memo[a] for a in node.args])
    return memo[e]


def stable_name_hash(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))

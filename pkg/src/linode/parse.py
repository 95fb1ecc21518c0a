"""Text formats: expressions, and key = value documents for equations,
transformations, fundamental systems and vector fields.

Expression grammar (whitespace-insensitive):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?            right associative
    atom    := number | name | name '(' expr ')' | '(' expr ')'

Numbers are exact rationals (0.25 is 1/4, 1e-3 is 1/1000).  The only
variable is t; the functions are exp, ln, sin, cos, tan, atan, abs and sqrt;
e and pi denote exp(1) and 4 atan(1).  Exponents must reduce to rational
constants, except that c^u with a positive constant c means exp(u ln c).
Names from a parameter table are replaced by their rational values while
parsing.

Documents hold one ``key = value`` per line; ``#`` starts a comment and
``param name = value`` adds to the parameter table for the lines below.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EvaluationError, LinodeError, TransformationError
from .expr import (ONE, ZERO, Expr, Interval, T, add, atan, const, evaluate, exp, func,
                   ln, mul, neg, power, serialize)
from .ode import LinearODE

FUNCTIONS = ("exp", "ln", "sin", "cos", "tan", "atan", "abs", "sqrt")


@dataclass(frozen=True)
class SourceSpan:
    begin: int
    end: int
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(LinodeError):
    code = "syntax"

    def __init__(self, message, span: SourceSpan, code=None):
        super().__init__(f"{span}: {message}", code=code)
        self.span = span
        self.detail = message


@dataclass(frozen=True)
class _Origin:
    """Where a piece of text sits inside the whole input."""

    text: str
    offset: int = 0
    line: int = 1
    column: int = 1

    def span(self, i: int, j: int) -> SourceSpan:
        before = self.text[:i]
        line = self.line + before.count("\n")
        col = (i - before.rfind("\n")) if "\n" in before else self.column + i
        begin = self.offset + len(before.encode())
        end = begin + len(self.text[i:j].encode())
        return SourceSpan(begin, max(begin, end), line, col)


# ---------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    begin: int
    end: int


def _tokenize(src: _Origin):
    text = src.text
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            ch = text[i]
            if ch == "@":
                raise ParseError("numeric leaves cannot be read back from text", src.span(i, i + 1),
                                 code="leaf")
            raise ParseError(f"unexpected character {ch!r}", src.span(i, i + 1))
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), i, m.end()))
        i = m.end()
    out.append(_Tok("end", "", len(text), len(text)))
    return out


# ---------------------------------------------------------------------------
# expression parser

_BINARY = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_POWER = 30


class _Parser:
    def __init__(self, src: _Origin, params: dict):
        self.src = src
        self.toks = _tokenize(src)
        self.pos = 0
        self.params = params

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, msg, tok: _Tok, code="syntax"):
        return ParseError(msg, self.src.span(tok.begin, max(tok.end, tok.begin + 1)), code=code)

    def expect(self, text):
        tok = self.take()
        if tok.text != text:
            found = repr(tok.text) if tok.kind != "end" else "end of input"
            raise self.error(f"expected {text!r}, found {found}", tok)
        return tok

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            raise self.error("empty expression", self.peek())
        e = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(f"unexpected {tok.text!r}", tok)
        return e

    def expression(self, min_bp: int) -> Expr:
        left = self.prefix()
        while True:
            tok = self.peek()
            bp = _BINARY.get(tok.text) if tok.kind == "op" else None
            if bp is None or bp < min_bp or (bp == min_bp and tok.text != "^"):
                if tok.kind in ("num", "name") or tok.text == "(":
                    raise self.error(f"missing operator before {tok.text!r}", tok)
                return left
            self.take()
            if tok.text == "^":
                right = self.expression(_UNARY_POWER)
                left = self.power(left, right, tok)
            else:
                right = self.expression(bp + 1)
                left = self.binary(tok.text, left, right, tok)

    def prefix(self) -> Expr:
        tok = self.take()
        if tok.kind == "op" and tok.text in "+-":
            operand = self.expression(_UNARY_POWER)
            return neg(operand) if tok.text == "-" else operand
        if tok.kind == "num":
            return const(Fraction(tok.text))
        if tok.kind == "name":
            return self.name(tok)
        if tok.text == "(":
            e = self.expression(0)
            self.expect(")")
            return e
        found = repr(tok.text) if tok.kind != "end" else "end of input"
        raise self.error(f"expected an operand, found {found}", tok)

    def name(self, tok: _Tok) -> Expr:
        name = tok.text
        if name in FUNCTIONS:
            if self.peek().text != "(":
                raise self.error(f"function {name} needs one argument in parentheses", tok, code="arity")
            self.take()
            if self.peek().text == ")":
                raise self.error(f"function {name} takes exactly one argument", self.peek(), code="arity")
            arg = self.expression(0)
            if self.peek().text == ",":
                raise self.error(f"function {name} takes exactly one argument", self.peek(), code="arity")
            self.expect(")")
            if name == "sqrt":
                return power(arg, Fraction(1, 2))
            if name == "abs":
                return func("abs", arg)
            return func(name, arg)
        if self.peek().text == "(":
            raise self.error(f"unknown identifier {name!r}", tok, code="unknown-identifier")
        if name == "t":
            return T
        if name in self.params:
            return const(self.params[name])
        if name == "e":
            return exp(ONE)
        if name == "pi":
            return mul(const(4), atan(ONE))
        raise self.error(f"unknown identifier {name!r}", tok, code="unknown-identifier")

    def binary(self, op, left, right, tok):
        if op == "+":
            return add(left, right)
        if op == "-":
            return add(left, neg(right))
        if op == "*":
            return mul(left, right)
        if right.is_const and right.value == 0:
            raise self.error("division by zero", tok, code="division-by-zero")
        return mul(left, power(right, -1))

    def power(self, base, ex, tok):
        if ex.is_const:
            if base.is_const and base.value == 0 and ex.value < 0:
                raise self.error("division by zero", tok, code="division-by-zero")
            return power(base, ex.value)
        if base is exp(ONE):
            return exp(ex)
        if base.is_const and base.value > 0:
            return exp(mul(ex, ln(base)))
        raise self.error("exponent must be a rational constant", tok, code="exponent")


def parse_expression(text: str, params: dict | None = None, origin: _Origin | None = None) -> Expr:
    src = origin or _Origin(text)
    table = {k: Fraction(v) for k, v in (params or {}).items()}
    return _Parser(src, table).parse()


# ---------------------------------------------------------------------------
# documents

@dataclass
class Entry:
    value: str
    origin: _Origin
    key_span: SourceSpan


@dataclass
class Document:
    entries: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    # parameter table in force at each entry
    scopes: dict = field(default_factory=dict)
    end: SourceSpan = SourceSpan(0, 0, 1, 1)

    def has(self, key: str) -> bool:
        return key in self.entries

    def missing(self, key: str) -> ParseError:
        return ParseError(f"missing field {key!r}", self.end, code="missing-field")

    def expression(self, key: str, default: str | None = None) -> Expr:
        if key not in self.entries:
            if default is None:
                raise self.missing(key)
            return parse_expression(default)
        entry = self.entries[key]
        return parse_expression(entry.value, self.scopes[key], entry.origin)

    def constant(self, key: str) -> Fraction:
        e = self.expression(key)
        if not e.is_const:
            entry = self.entries[key]
            raise ParseError(f"{key} must be a rational constant", entry.origin.span(0, len(entry.value)),
                             code="not-constant")
        return e.value

    def integer(self, key: str) -> int:
        if key not in self.entries:
            raise self.missing(key)
        entry = self.entries[key]
        text = entry.value.strip()
        if not re.fullmatch(r"[+-]?\d+", text):
            raise ParseError(f"{key} must be an integer", entry.origin.span(0, len(entry.value)),
                             code="not-integer")
        return int(text)

    def interval(self, key: str = "interval") -> Interval:
        if key not in self.entries:
            raise self.missing(key)
        entry = self.entries[key]
        raw = entry.value
        whole = entry.origin.span(0, len(raw))
        m = re.fullmatch(r"\s*\[(.*),(.*)\]\s*", raw)
        if m is None:
            raise ParseError("interval must look like [lo, hi]", whole, code="interval")
        ends = []
        for g in (1, 2):
            sub = _Origin(m.group(g), *_shift(entry.origin, m.start(g)))
            e = parse_expression(m.group(g), self.scopes[key], sub)
            if not e.free_of_t():
                raise ParseError("interval ends must be constants", sub.span(0, len(m.group(g))),
                                 code="interval")
            ends.append(float(evaluate(e, 0.0)))
        try:
            return Interval(*ends)
        except LinodeError as err:
            raise ParseError(str(err), whole, code="interval") from err

    def span_of(self, key: str) -> SourceSpan:
        if key in self.entries:
            entry = self.entries[key]
            return entry.origin.span(0, len(entry.value))
        return self.end


def _shift(origin: _Origin, i: int):
    s = origin.span(i, i)
    return s.begin, s.line, s.column


_LINE = re.compile(r"^\s*(?:(param)\s+)?([A-Za-z_][A-Za-z_0-9]*)\s*=(.*)$")


def parse_document(text: str, params: dict | None = None) -> Document:
    doc = Document(params={k: Fraction(v) for k, v in (params or {}).items()})
    offset = 0
    lines = text.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        start = offset
        offset += len(raw.encode()) + 1
        if not body.strip():
            continue
        m = _LINE.match(body)
        if m is None:
            col = len(body) - len(body.lstrip()) + 1
            span = SourceSpan(start + col - 1, start + len(body.rstrip().encode()), lineno, col)
            raise ParseError("expected 'key = value'", span)
        is_param, key, value = m.group(1), m.group(2), m.group(3)
        vcol = m.start(3)
        origin = _Origin(value, start + len(body[:vcol].encode()), lineno, vcol + 1)
        key_span = SourceSpan(start + m.start(2), start + m.end(2), lineno, m.start(2) + 1)
        if is_param:
            e = parse_expression(value, doc.params, origin)
            if not e.is_const:
                raise ParseError(f"parameter {key} must be a rational constant",
                                 origin.span(0, len(value)), code="not-constant")
            if key in ("t", "e", "pi") or key in FUNCTIONS:
                raise ParseError(f"parameter name {key!r} is reserved", key_span, code="reserved")
            doc.params = {**doc.params, key: e.value}
            continue
        if key in doc.entries:
            raise ParseError(f"duplicate field {key!r}", key_span, code="duplicate-field")
        doc.entries[key] = Entry(value, origin, key_span)
        doc.scopes[key] = doc.params
    doc.end = SourceSpan(len(text.encode()), len(text.encode()), len(lines), len(lines[-1]) + 1)
    return doc


def _reject_unknown(doc: Document, allowed):
    for key, entry in doc.entries.items():
        if not allowed(key):
            raise ParseError(f"unknown field {key!r}", entry.key_span, code="unknown-field")


# ---------------------------------------------------------------------------
# typed documents

def parse_ode(text: str, params: dict | None = None) -> LinearODE:
    doc = parse_document(text, params)
    r = doc.integer("order")
    if r < 2:
        raise ParseError(f"order must be at least 2, got {r}", doc.span_of("order"), code="order")
    coeff_keys = {k for k in doc.entries if re.fullmatch(r"a\d+", k)}
    _reject_unknown(doc, lambda k: k in ("order", "b", "interval") or k in coeff_keys)
    extra = sorted(int(k[1:]) for k in coeff_keys if int(k[1:]) >= r)
    for m in extra:
        key = f"a{m}"
        if m == r and doc.expression(key) is ONE:
            continue
        raise ParseError(f"{key} is beyond the order {r} (a{r} may only be 1)",
                         doc.entries[key].key_span, code="coefficient-count")
    missing = [f"a{m}" for m in range(r) if f"a{m}" not in doc.entries]
    if missing:
        raise ParseError(f"order {r} needs coefficients a0..a{r - 1}; missing {', '.join(missing)}",
                         doc.end, code="coefficient-count")
    interval = doc.interval()
    coeffs = tuple(doc.expression(f"a{m}") for m in range(r))
    rhs = doc.expression("b", "0")
    ode = LinearODE(coeffs, rhs, interval)
    for key, e in [(f"a{m}", c) for m, c in enumerate(coeffs)] + [("b", rhs)]:
        try:
            LinearODE((e, ZERO), ZERO, interval).check_evaluable()
        except EvaluationError as err:
            raise ParseError(f"{key} is not evaluable on {interval}: {err}", doc.span_of(key),
                             code="unevaluable") from err
    return ode


def parse_transformation(text: str, params: dict | None = None, validate: bool = True):
    from .transform import PointTransformation

    doc = parse_document(text, params)
    _reject_unknown(doc, lambda k: k in ("T", "X1", "X0", "interval"))
    tau = PointTransformation(doc.expression("T"), doc.expression("X1", "1"),
                              doc.expression("X0", "0"), doc.interval())
    if validate:
        try:
            tau.validate()
        except TransformationError as err:
            key = "X1" if err.code == "vanishing-x1" else "T"
            raise ParseError(str(err), doc.span_of(key), code=err.code) from err
    return tau


def parse_system(text: str, params: dict | None = None):
    from .reparam import FundamentalSystem

    doc = parse_document(text, params)
    r = doc.integer("order")
    if r < 1:
        raise ParseError("order must be positive", doc.span_of("order"), code="order")
    keys = [f"chi{i}" for i in range(1, r + 1)]
    _reject_unknown(doc, lambda k: k in ("order", "interval") or k in keys)
    missing = [k for k in keys if k not in doc.entries]
    if missing:
        raise ParseError(f"order {r} needs chi1..chi{r}; missing {', '.join(missing)}",
                         doc.end, code="coefficient-count")
    return FundamentalSystem(tuple(doc.expression(k) for k in keys), doc.interval())


def parse_vector_field(text: str, params: dict | None = None):
    from .symmetry import VectorFieldLin

    doc = parse_document(text, params)
    _reject_unknown(doc, lambda k: k in ("tau", "xi1", "xi0", "interval"))
    return VectorFieldLin(doc.expression("tau", "0"), doc.expression("xi1", "0"),
                          doc.expression("xi0", "0"))


def vector_field_document(Q, rename=None) -> str:
    return (f"tau = {serialize(Q.tau, rename)}\nxi1 = {serialize(Q.xi1, rename)}\n"
            f"xi0 = {serialize(Q.xi0, rename)}\n")


KINDS = {
    ".ode": "ode",
    ".tau": "transformation",
    ".sys": "system",
    ".vf": "vector-field",
}

PARSERS = {
    "ode": parse_ode,
    "transformation": parse_transformation,
    "system": parse_system,
    "vector-field": parse_vector_field,
    "expression": parse_expression,
}


def kind_of(path: str, text: str) -> str:
    """Document kind from the file extension, else from the keys present."""
    for ext, kind in KINDS.items():
        if path.endswith(ext):
            return kind
    doc = parse_document(text)
    if doc.has("T"):
        return "transformation"
    if doc.has("chi1"):
        return "system"
    if doc.has("tau") or doc.has("xi1") or doc.has("xi0"):
        return "vector-field"
    if doc.has("order"):
        return "ode"
    return "expression"

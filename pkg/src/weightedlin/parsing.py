"""Text grammar for fields, functions and coordinate tuples.

A field is a polynomial expression in the variables and the formal symbols
``d/dvar``, linear in the latter: ``(x + y^2)*d/dx + 2*y*d/dy``.  Coefficients
are integers or quotients ``p/q``; ``^`` (or ``**``) takes a non-negative
integer exponent.  An optional time variable (``t``) makes the field
time-dependent.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .series import SeriesContext, TruncatedSeries
from .vectorfield import TimeVectorField, VectorField


class ParseError(ValueError):
    def __init__(self, message, text="", pos=0):
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {self.line}, column {self.column}: {message}")


_TOKEN = re.compile(
    r"\s*(?:(?P<dvar>d/d(?P<dname>[A-Za-z_]\w*))|(?P<num>\d+)|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        start = m.start(m.lastgroup if m.lastgroup != "dname" else "dvar")
        if m.group("dvar"):
            tokens.append(("dvar", m.group("dname"), start))
        elif m.group("num"):
            tokens.append(("num", int(m.group("num")), start))
        elif m.group("name"):
            tokens.append(("name", m.group("name"), start))
        else:
            op = m.group("op")
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Poly:
    """Sparse polynomial in the variables and at most linear in the d-symbols.

    Keys are ``(alpha, d)`` where ``d`` is an axis index or None.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, c, n):
        return cls({((0,) * n, None): Fraction(c)})

    def add(self, other, sign=1):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + sign * v
        return _Poly(out)

    def mul(self, other, where):
        out = {}
        for (a, d1), u in self.terms.items():
            for (b, d2), v in other.terms.items():
                if d1 is not None and d2 is not None:
                    raise where("product of two d/d symbols")
                key = (tuple(x + y for x, y in zip(a, b)), d1 if d1 is not None else d2)
                out[key] = out.get(key, 0) + u * v
        return _Poly(out)

    def constant_value(self):
        if all(sum(a) == 0 and d is None for a, d in self.terms):
            return sum(self.terms.values(), Fraction(0))
        return None


class _Parser:
    def __init__(self, text, names, allow_d=True):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.names = list(names)
        self.index = {v: j for j, v in enumerate(self.names)}
        self.n = len(self.names)
        self.allow_d = allow_d

    def error(self, msg, tok=None):
        tok = tok or self.tokens[self.i]
        return ParseError(msg, self.text, tok[2])

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise self.error(f"expected {op!r}", tok)

    def parse(self):
        out = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return out

    def expr(self):
        tok = self.peek()
        sign = 1
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = _Poly().add(acc, -1)
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            acc = acc.add(rhs, 1 if op == "+" else -1)
        return acc

    def term(self):
        acc = self.power()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            tok = self.take()
            rhs = self.power()
            if tok[1] == "*":
                acc = acc.mul(rhs, lambda m: self.error(m, tok))
            else:
                c = rhs.constant_value()
                if c is None:
                    raise self.error("can only divide by a constant", tok)
                if c == 0:
                    raise self.error("division by zero", tok)
                acc = _Poly({k: v / c for k, v in acc.terms.items()})
        return acc

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            tok = self.take()
            exp = self.take()
            if exp[0] != "num":
                raise self.error("exponent must be a non-negative integer", exp)
            out = _Poly.const(1, self.n)
            for _ in range(exp[1]):
                out = out.mul(base, lambda m: self.error(m, tok))
            return out
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return _Poly.const(val, self.n)
        if kind == "name":
            if val not in self.index:
                raise self.error(f"unknown identifier {val!r}", tok)
            alpha = tuple(int(j == self.index[val]) for j in range(self.n))
            return _Poly({(alpha, None): Fraction(1)})
        if kind == "dvar":
            if not self.allow_d:
                raise self.error("d/d symbols are not allowed here", tok)
            if val not in self.index:
                raise self.error(f"unknown variable d/d{val}", tok)
            return _Poly({((0,) * self.n, self.index[val]): Fraction(1)})
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "op" and val == "-":
            return _Poly().add(self.power(), -1)
        if kind == "end":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected {val!r}", tok)


def _field_terms(text, names):
    poly = _Parser(text, names).parse()
    out = []
    for (alpha, d), c in poly.terms.items():
        if d is None:
            raise ParseError(
                f"term with monomial {alpha} has no d/dvar factor", text, 0
            )
        out.append((d, alpha, c))
    return out


def parse_field(text: str, context: SeriesContext, names) -> VectorField:
    """Parse a time-independent field over ``names`` into ``context``."""
    names = list(names)
    if len(names) != context.dimension:
        raise ValueError(f"{len(names)} variable names for a {context.dimension}-dimensional context")
    return VectorField.from_terms(context, _field_terms(text, names))


def parse_time_field(text: str, context: SeriesContext, names, time="t") -> TimeVectorField:
    """Parse a field that may depend polynomially on the time variable."""
    names = list(names)
    if time in names:
        raise ValueError(f"time variable {time!r} clashes with a coordinate name")
    buckets = {}
    for d, alpha, c in _field_terms(text, names + [time]):
        buckets.setdefault(alpha[-1], []).append((d, alpha[:-1], c))
    top = max(buckets, default=0)
    return TimeVectorField(
        context,
        [VectorField.from_terms(context, buckets.get(k, [])) for k in range(top + 1)],
    )


def parse_series(text: str, context: SeriesContext, names) -> TruncatedSeries:
    poly = _Parser(text, names, allow_d=False).parse()
    return TruncatedSeries(context, {a: c for (a, _), c in poly.terms.items()})


def split_top_level(text: str, sep: str = ",") -> list:
    parts, depth, start = [], 0, 0
    for j, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:j])
            start = j + 1
    parts.append(text[start:])
    return parts


def parse_tuple(text: str, context: SeriesContext, names) -> list:
    """A comma-separated coordinate tuple such as ``"x + y^2/3, y"``."""
    text = text.strip()
    if text.startswith("(") and text.endswith(")") and len(split_top_level(text[1:-1])) > 1:
        text = text[1:-1]
    parts = split_top_level(text)
    if len(parts) != context.dimension:
        raise ValueError(f"expected {context.dimension} components, got {len(parts)}")
    return [parse_series(p, context, names) for p in parts]

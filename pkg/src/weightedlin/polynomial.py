"""Dense univariate polynomials over Q, with Sturm sequences for real-root counting."""
from __future__ import annotations

from fractions import Fraction
from math import isqrt


class Polynomial:
    """Coefficients stored lowest degree first, without trailing zeros."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = [Fraction(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def from_roots(cls, roots) -> "Polynomial":
        p = cls([1])
        for r in roots:
            p = p * cls([-Fraction(r), 1])
        return p

    @classmethod
    def t(cls) -> "Polynomial":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def _lift(self, other):
        return other if isinstance(other, Polynomial) else Polynomial([other])

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other):
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading()
        q = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - dq - 1, -1, -1):
            c = rem[k + dq] / lead
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return Polynomial(q), Polynomial(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def derivative(self) -> "Polynomial":
        return Polynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return Polynomial([c / self.leading() for c in self.coeffs])

    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        return format_polynomial(self)


def format_polynomial(p: Polynomial, var: str = "t") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        mag = abs(c)
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic greatest common divisor (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def squarefree_part(p: Polynomial) -> Polynomial:
    if p.degree <= 0:
        return p.monic()
    return (p // gcd(p, p.derivative())).monic()


def sturm_sequence(p: Polynomial) -> list:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def _sign_changes(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _signs_at_infinity(seq, positive: bool):
    out = []
    for q in seq:
        lead = q.leading()
        if not positive and q.degree % 2 == 1:
            lead = -lead
        out.append(lead)
    return out


def count_real_roots(p: Polynomial, lo=None, hi=None) -> int:
    """Number of distinct real roots in ``(lo, hi]``; ``None`` means infinite."""
    if p.is_zero():
        raise ValueError("the zero polynomial has infinitely many roots")
    if p.degree == 0:
        return 0
    seq = sturm_sequence(squarefree_part(p))
    left = _signs_at_infinity(seq, False) if lo is None else [q(Fraction(lo)) for q in seq]
    right = _signs_at_infinity(seq, True) if hi is None else [q(Fraction(hi)) for q in seq]
    return _sign_changes(left) - _sign_changes(right)


def has_real_root(p: Polynomial) -> bool:
    return p.degree >= 1 and count_real_roots(p) > 0


def _divisors(n: int) -> list:
    n = abs(n)
    small, large = [], []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return small + large[::-1]


def integer_coefficients(p: Polynomial) -> list:
    from math import lcm

    d = 1
    for c in p.coeffs:
        d = lcm(d, c.denominator)
    return [int(c * d) for c in p.coeffs]


def rational_roots(p: Polynomial) -> dict:
    """Rational roots with multiplicities, by the rational root test."""
    roots = {}
    p = Polynomial(p.coeffs)
    while p.degree >= 1 and p.coeffs[0] == 0:
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
        p = Polynomial(p.coeffs[1:])
    if p.degree < 1:
        return roots
    ints = integer_coefficients(p)
    candidates = set()
    for num in _divisors(ints[0]):
        for den in _divisors(ints[-1]):
            candidates.add(Fraction(num, den))
            candidates.add(Fraction(-num, den))
    for r in sorted(candidates):
        lin = Polynomial([-r, 1])
        while p.degree >= 1:
            q, rem = divmod(p, lin)
            if not rem.is_zero():
                break
            roots[r] = roots.get(r, 0) + 1
            p = q
    return roots


def deflate(p: Polynomial, roots: dict) -> Polynomial:
    """Divide out ``prod (t - r)^m`` for the given roots."""
    for r, m in roots.items():
        p = p // (Polynomial([-r, 1]) ** m)
    return p

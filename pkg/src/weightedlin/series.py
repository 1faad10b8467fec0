"""Sparse multivariate power series over Q, truncated at a weighted degree.

A series lives in a :class:`SeriesContext` (weighting + cutoff ``N``) and
only ever stores monomials ``x^alpha`` with ``<w, alpha> <= N``.  Products
discard anything above the cutoff as soon as it is formed, so two series
are equal exactly when their term maps are equal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ContextMismatch

INFINITY = math.inf

MultiIndex = tuple  # tuple[int, ...]


def weighted_degree(alpha: Sequence[int], weights: Sequence[int]) -> int:
    """Return ``<w, alpha> = sum(w_i * alpha_i)``."""
    if len(alpha) != len(weights):
        raise ValueError(
            f"multi-index of length {len(alpha)} does not match "
            f"{len(weights)} weights"
        )
    return sum(a * w for a, w in zip(alpha, weights))


def monomial_sort_key(alpha: Sequence[int], weights: Sequence[int]):
    # graded by weighted degree, then lexicographic (x^1 first)
    return (weighted_degree(alpha, weights), tuple(-a for a in alpha))


@dataclass(frozen=True)
class Weighting:
    """Positive, non-decreasing integer weights ``1 <= w_1 <= ... <= w_n``."""

    weights: tuple

    def __post_init__(self):
        weights = tuple(int(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise ValueError("a weighting needs at least one coordinate")
        if any(w < 1 for w in weights):
            raise ValueError(f"weights must be positive integers, got {weights}")
        if any(a > b for a, b in zip(weights, weights[1:])):
            raise ValueError(f"weights must be non-decreasing, got {weights}")

    @classmethod
    def trivial(cls, n: int) -> "Weighting":
        return cls((1,) * n)

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    @property
    def dimension(self) -> int:
        return len(self.weights)

    @property
    def smallest(self) -> int:
        return self.weights[0]

    @property
    def largest(self) -> int:
        return self.weights[-1]

    def degree(self, alpha: Sequence[int]) -> int:
        return weighted_degree(alpha, self.weights)

    def is_trivial(self) -> bool:
        return all(w == 1 for w in self.weights)


@dataclass(frozen=True)
class SeriesContext:
    """Ambient dimension, weighting and truncation cutoff of a series."""

    weighting: Weighting
    cutoff: int

    def __post_init__(self):
        if not isinstance(self.weighting, Weighting):
            object.__setattr__(self, "weighting", Weighting(tuple(self.weighting)))
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be non-negative, got {self.cutoff}")

    @classmethod
    def create(cls, weights: Sequence[int], cutoff: int) -> "SeriesContext":
        return cls(Weighting(tuple(weights)), int(cutoff))

    @property
    def dimension(self) -> int:
        return self.weighting.dimension

    @property
    def weights(self) -> tuple:
        return self.weighting.weights

    def degree(self, alpha) -> int:
        return self.weighting.degree(alpha)

    def with_cutoff(self, cutoff: int) -> "SeriesContext":
        return SeriesContext(self.weighting, int(cutoff))

    def zero(self) -> "TruncatedSeries":
        return TruncatedSeries(self, {})

    def one(self) -> "TruncatedSeries":
        return self.constant(1)

    def constant(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self, {(0,) * self.dimension: c})

    def variable(self, i: int) -> "TruncatedSeries":
        return self.monomial(unit_vector(self.dimension, i))

    def variables(self) -> tuple:
        return tuple(self.variable(i) for i in range(self.dimension))

    def monomial(self, alpha, c=1) -> "TruncatedSeries":
        return TruncatedSeries(self, {tuple(alpha): c})


def unit_vector(n: int, i: int) -> tuple:
    if not 0 <= i < n:
        raise IndexError(f"axis {i} out of range for dimension {n}")
    return tuple(1 if j == i else 0 for j in range(n))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficient {c!r} is not an exact rational")


class TruncatedSeries:
    """Exact power series modulo the weighted ideal ``F^{N+1}``.

    ``terms`` maps exponent tuples to nonzero :class:`Fraction` values.  The
    instance is immutable; arithmetic returns new series.
    """

    def __init__(self, context: SeriesContext, terms: Mapping = (), *, _trusted=False):
        self.context = context
        if _trusted:
            self._terms = terms
            return
        n = context.dimension
        weights = context.weights
        cutoff = context.cutoff
        clean = {}
        for alpha, c in dict(terms).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise ValueError(
                    f"multi-index {alpha} has length {len(alpha)}, expected {n}"
                )
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = _as_fraction(c)
            if c and weighted_degree(alpha, weights) <= cutoff:
                clean[alpha] = clean.get(alpha, 0) + c
        self._terms = {a: c for a, c in clean.items() if c}

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, context, terms):
        return cls(context, terms, _trusted=True)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def dimension(self) -> int:
        return self.context.dimension

    def items(self) -> Iterator:
        """Terms in canonical order: graded by weighted degree, then lex."""
        w = self.context.weights
        for alpha in sorted(self._terms, key=lambda a: monomial_sort_key(a, w)):
            yield alpha, self._terms[alpha]

    def __iter__(self):
        return self.items()

    def __len__(self):
        return len(self._terms)

    def coefficient(self, alpha) -> Fraction:
        return self._terms.get(tuple(alpha), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coefficient((0,) * self.dimension)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @cached_property
    def _degrees(self) -> dict:
        w = self.context.weights
        return {a: weighted_degree(a, w) for a in self._terms}

    def order(self):
        """Weighted order ``Theta_w``: smallest weighted degree present (inf for 0)."""
        if not self._terms:
            return INFINITY
        return min(self._degrees.values())

    def max_degree(self) -> int:
        return max(self._degrees.values(), default=-1)

    # -- comparisons ----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.context == other.context and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == self.context.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.context, frozenset(self._terms.items())))

    def __repr__(self):
        return f"TruncatedSeries({format_series(self)}, N={self.context.cutoff})"

    # -- ring operations ------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if self.context != other.context:
            raise ContextMismatch(
                f"series contexts differ: {self.context} vs {other.context}"
            )

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.context.constant(other)
        raise TypeError(f"cannot combine series with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for a, c in other._terms.items():
            s = out.get(a, 0) + c
            if s:
                out[a] = s
            else:
                out.pop(a, None)
        return TruncatedSeries._raw(self.context, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(self.context, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        c = _as_fraction(c)
        if not c:
            return self.context.zero()
        return TruncatedSeries._raw(self.context, {a: c * v for a, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        if not self._terms or not other._terms:
            return self.context.zero()
        cutoff = self.context.cutoff
        mine = sorted(self._degrees.items(), key=lambda kv: kv[1])
        theirs = sorted(other._degrees.items(), key=lambda kv: kv[1])
        out: dict = {}
        for a, da in mine:
            budget = cutoff - da
            if budget < theirs[0][1]:
                break
            ca = self._terms[a]
            for b, db in theirs:
                if db > budget:
                    break
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0) + ca * other._terms[b]
        return TruncatedSeries._raw(self.context, {k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        result = self.context.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- calculus -------------------------------------------------------------

    def partial_derivative(self, i: int) -> "TruncatedSeries":
        """Term-wise d/dx^i (0-based axis); the context is unchanged."""
        n = self.dimension
        if not 0 <= i < n:
            raise IndexError(f"axis {i} out of range for dimension {n}")
        out = {}
        for a, c in self._terms.items():
            e = a[i]
            if e:
                b = a[:i] + (e - 1,) + a[i + 1:]
                out[b] = c * e
        return TruncatedSeries._raw(self.context, out)

    def compose(self, tuple_: Sequence["TruncatedSeries"]) -> "TruncatedSeries":
        return compose(self, tuple_)

    def reciprocal(self) -> "TruncatedSeries":
        return reciprocal(self)

    # -- truncation / regrading ----------------------------------------------

    def homogeneous_part(self, k: int) -> "TruncatedSeries":
        """Terms of weighted degree exactly ``k``."""
        return TruncatedSeries._raw(
            self.context, {a: c for a, c in self._terms.items() if self._degrees[a] == k}
        )

    def truncate(self, k: int) -> "TruncatedSeries":
        """Drop terms of weighted degree above ``k`` (context kept)."""
        return TruncatedSeries._raw(
            self.context, {a: c for a, c in self._terms.items() if self._degrees[a] <= k}
        )

    def filter(self, keep) -> "TruncatedSeries":
        return TruncatedSeries._raw(
            self.context, {a: c for a, c in self._terms.items() if keep(a)}
        )

    def to_context(self, context: SeriesContext) -> "TruncatedSeries":
        """Reinterpret the stored polynomial in ``context`` (same dimension)."""
        if context.dimension != self.dimension:
            raise ContextMismatch(
                f"cannot move a {self.dimension}-variable series into dimension "
                f"{context.dimension}"
            )
        return TruncatedSeries(context, self._terms)

    def with_cutoff(self, cutoff: int) -> "TruncatedSeries":
        return self.to_context(self.context.with_cutoff(cutoff))

    def evaluate_coefficients(self, fn) -> "TruncatedSeries":
        return TruncatedSeries(self.context, {a: fn(c) for a, c in self._terms.items()})

    def check_invariants(self):
        """Assert the representation invariants (used by tests)."""
        w = self.context.weights
        for a, c in self._terms.items():
            assert c != 0, f"zero coefficient stored at {a}"
            assert isinstance(c, Fraction)
            assert len(a) == len(w)
            assert weighted_degree(a, w) <= self.context.cutoff, a


def theta_w(f: TruncatedSeries):
    return f.order()


def _check_same_context(items: Iterable[TruncatedSeries], context: SeriesContext):
    for s in items:
        if s.context != context:
            raise ContextMismatch(f"series contexts differ: {s.context} vs {context}")


def compose(f: TruncatedSeries, phi: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """Substitute ``x^i -> phi[i]`` into ``f``.

    Every ``phi[i]`` must lie in the maximal ideal (no constant term).
    Monomials are built incrementally from shorter ones, and a monomial whose
    guaranteed order already exceeds the cutoff is skipped outright.
    """
    ctx = f.context
    n = ctx.dimension
    if len(phi) != n:
        raise ValueError(f"need {n} substitutions, got {len(phi)}")
    if not phi:
        return f
    _check_same_context(phi, phi[0].context)
    target = phi[0].context
    for i, p in enumerate(phi):
        if p.constant_term() != 0:
            raise ValueError(
                f"substitution for x^{i + 1} has nonzero constant term "
                f"{p.constant_term()}; it must lie in the maximal ideal"
            )
    orders = [p.order() for p in phi]
    cutoff = target.cutoff
    cache: dict = {(0,) * n: target.one()}

    def power_product(alpha):
        got = cache.get(alpha)
        if got is not None:
            return got
        j = max(k for k in range(n) if alpha[k])
        prev = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        got = power_product(prev) * phi[j]
        cache[alpha] = got
        return got

    out: dict = {}
    for alpha, c in f.items():
        bound = sum(a * o for a, o in zip(alpha, orders) if a)
        if bound > cutoff:
            continue
        for b, v in power_product(alpha)._terms.items():
            s = out.get(b, 0) + c * v
            if s:
                out[b] = s
            else:
                out.pop(b, None)
    return TruncatedSeries._raw(target, out)


def reciprocal(f: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse; requires an invertible constant term."""
    c = f.constant_term()
    if c == 0:
        raise ZeroDivisionError("series with zero constant term has no reciprocal")
    inv_c = 1 / c
    # 1/f = (1/c) * sum_k (-h/c)^k with h = f - c in the maximal ideal
    q = (f - c).scale(-inv_c)
    result = f.context.one()
    term = f.context.one()
    while True:
        term = term * q
        if term.is_zero():
            break
        result = result + term
    return result.scale(inv_c)


def format_rational(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def format_monomial(alpha, names=None) -> str:
    parts = []
    for i, e in enumerate(alpha):
        if not e:
            continue
        name = names[i] if names else f"x{i + 1}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_series(f: TruncatedSeries, names: Sequence[str] | None = None) -> str:
    """Human-readable text, round-trippable through the cli grammar."""
    if f.is_zero():
        return "0"
    chunks = []
    for alpha, c in f.items():
        mono = format_monomial(alpha, names)
        mag = abs(c)
        if mono:
            coeff = "" if mag == 1 else (f"{mag}*" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}*")
            body = coeff + mono
        else:
            body = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        sign = "-" if c < 0 else "+"
        chunks.append((sign, body))
    first_sign, first = chunks[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in chunks[1:]:
        text += f" {sign} {body}"
    return text

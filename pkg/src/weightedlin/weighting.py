"""Weighted gradings of vector fields: slices, admissibility, Euler field, kappa family."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import NotAdmissible
from .series import SeriesContext, Weighting, weighted_degree
from .vectorfield import TimeVectorField, VectorField


def vf_degree(axis: int, alpha, weights) -> int:
    """Weighted degree ``<w, alpha> - w_i`` of ``x^alpha d/dx^i``."""
    return weighted_degree(alpha, weights) - weights[axis]


def graded_component_vf(X: VectorField, k: int) -> VectorField:
    """The slice ``X_[k]``: terms ``x^alpha d/dx^i`` with ``<w,alpha> - w_i = k``."""
    w = X.context.weights
    return X.filter_terms(lambda i, a: vf_degree(i, a, w) == k)


def graded_components(X: VectorField) -> dict:
    """All nonzero slices, keyed by degree."""
    w = X.context.weights
    degrees = sorted({vf_degree(i, a, w) for i, a, _ in X.terms()})
    return {k: graded_component_vf(X, k) for k in degrees}


def admissibility_witness(X: VectorField):
    """First term of negative degree in canonical order, as ``(axis, alpha)``, or None."""
    w = X.context.weights
    for i, alpha, _ in X.terms():
        if vf_degree(i, alpha, w) < 0:
            return i, alpha
    return None


def is_admissible(X: VectorField):
    """``(True, None)`` or ``(False, (axis, alpha))`` for the first offending term."""
    witness = admissibility_witness(X)
    return witness is None, witness


def require_admissible(X: VectorField):
    witness = admissibility_witness(X)
    if witness is not None:
        raise NotAdmissible(*witness)


def weighted_linear_approximation(X: VectorField) -> VectorField:
    return graded_component_vf(X, 0)


def euler_field(w, cutoff: int | None = None) -> VectorField:
    """``E_w = sum_i w_i x^i d/dx^i``; ``w`` may be a Weighting or a SeriesContext."""
    if isinstance(w, SeriesContext):
        ctx = w
    else:
        weighting = w if isinstance(w, Weighting) else Weighting(tuple(w))
        ctx = SeriesContext(weighting, max(weighting.largest, 1) if cutoff is None else cutoff)
    return VectorField(ctx, [v.scale(wi) for v, wi in zip(ctx.variables(), ctx.weights)])


def is_weighted_euler_like(X: VectorField) -> bool:
    return admissibility_witness(X) is None and weighted_linear_approximation(X) == euler_field(
        X.context
    )


@lru_cache(maxsize=None)
def monomials_of_degree(weights: tuple, d: int) -> tuple:
    """Every ``alpha`` with ``<w, alpha> = d`` (bounded knapsack over the weights)."""
    n = len(weights)
    if d < 0:
        return ()
    out = []

    def rec(pos, remaining, prefix):
        if pos == n - 1:
            if remaining % weights[pos] == 0:
                out.append(tuple(prefix) + (remaining // weights[pos],))
            return
        for a in range(remaining // weights[pos] + 1):
            prefix.append(a)
            rec(pos + 1, remaining - a * weights[pos], prefix)
            prefix.pop()

    rec(0, d, [])
    return tuple(out)


def basis_sort_key(pair):
    """Ascending key whose reverse is the slice order: |alpha|, then axis, then alpha."""
    i, alpha = pair
    return sum(alpha), i, alpha


@dataclass(frozen=True)
class GradedSliceBasis:
    """Monomial vector fields spanning the degree-``k`` slice, in triangular order.

    The order sorts by decreasing ``|alpha|``, then decreasing axis, then
    decreasing lexicographic ``alpha``.
    """

    weighting: Weighting
    degree: int
    basis: tuple

    def __len__(self):
        return len(self.basis)

    def __iter__(self):
        return iter(self.basis)

    def __getitem__(self, idx):
        return self.basis[idx]

    def index(self) -> dict:
        return {pair: j for j, pair in enumerate(self.basis)}

    def element(self, j: int, context: SeriesContext) -> VectorField:
        i, alpha = self.basis[j]
        return VectorField.monomial(context, i, alpha)

    def coordinates(self, X: VectorField) -> list:
        """Coefficients of ``X`` in this basis; raises if ``X`` has other terms."""
        idx = self.index()
        vec = [0] * len(self.basis)
        for i, alpha, c in X.terms():
            j = idx.get((i, alpha))
            if j is None:
                raise ValueError(f"term x^{alpha} d/dx{i + 1} is not in the degree-{self.degree} slice")
            vec[j] = c
        return vec

    def combination(self, coeffs, context: SeriesContext) -> VectorField:
        return VectorField.from_terms(
            context, [(i, alpha, c) for (i, alpha), c in zip(self.basis, coeffs) if c]
        )


@lru_cache(maxsize=None)
def _slice_pairs(weights: tuple, k: int) -> tuple:
    pairs = []
    for i, wi in enumerate(weights):
        for alpha in monomials_of_degree(weights, wi + k):
            pairs.append((i, alpha))
    pairs.sort(key=basis_sort_key, reverse=True)
    return tuple(pairs)


def slice_basis(w, k: int) -> GradedSliceBasis:
    weighting = w if isinstance(w, Weighting) else Weighting(tuple(w))
    return GradedSliceBasis(weighting, k, _slice_pairs(weighting.weights, k))


def slice_dimension(w, k: int) -> int:
    return len(slice_basis(w, k))


@dataclass(frozen=True)
class BlockStructure:
    """Grouping of the axes by distinct weight: ``d[l]`` axes in block ``l``."""

    m: int
    d: tuple
    mu: tuple
    weights: tuple

    @classmethod
    def of(cls, w) -> "BlockStructure":
        weights = tuple(w.weights if isinstance(w, (Weighting, SeriesContext)) else w)
        distinct = sorted(set(weights))
        mu = tuple(distinct.index(x) for x in weights)
        d = tuple(mu.count(l) for l in range(len(distinct)))
        return cls(len(distinct), d, mu, tuple(distinct))

    def axes(self, block: int) -> list:
        return [i for i, b in enumerate(self.mu) if b == block]


def kappa_family(X: VectorField) -> TimeVectorField:
    """``kappa_t^* X = sum_k t^k X_[k]`` for admissible ``X``."""
    require_admissible(X)
    ctx = X.context
    top = ctx.cutoff
    slices = [graded_component_vf(X, k) for k in range(top + 1)]
    return TimeVectorField(ctx, slices)

"""Linear parts, characteristic polynomials, resonances and hyperbolicity."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .polynomial import Polynomial, deflate, gcd, has_real_root, rational_roots
from .series import Weighting
from .vectorfield import VectorField
from .weighting import BlockStructure, graded_component_vf, slice_basis

FLOAT_TOLERANCE = 1e-9


@dataclass
class LinearPart:
    """Transpose of ``DX(0)``: column ``i`` holds the linear part of ``X(x^i)``."""

    matrix: list
    block_structure: BlockStructure

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    def block(self, l: int) -> list:
        axes = self.block_structure.axes(l)
        return [[self.matrix[r][c] for c in axes] for r in axes]

    def is_block_diagonal(self) -> bool:
        mu = self.block_structure.mu
        n = self.dimension
        return all(
            self.matrix[r][c] == 0 for r in range(n) for c in range(n) if mu[r] != mu[c]
        )

    def __eq__(self, other):
        if not isinstance(other, LinearPart):
            return NotImplemented
        return self.matrix == other.matrix and self.block_structure == other.block_structure


def _linear_matrix(X: VectorField) -> list:
    n = X.dimension
    M = [[Fraction(0)] * n for _ in range(n)]
    for i, comp in enumerate(X.components):
        for j in range(n):
            alpha = tuple(int(k == j) for k in range(n))
            M[j][i] = comp.coefficient(alpha)
    return M


def _require_vanishing(X: VectorField):
    for i, comp in enumerate(X.components):
        if comp.constant_term() != 0:
            raise ValueError(f"component {i + 1} does not vanish at the origin")


def linearization(X: VectorField) -> VectorField:
    """``X_lin``: keep the terms linear in ``x``."""
    return X.filter_terms(lambda i, a: sum(a) == 1)


def linear_part(X: VectorField) -> LinearPart:
    _require_vanishing(X)
    return LinearPart(_linear_matrix(X), BlockStructure.of(X.context.weighting))


def weighted_linear_part(X: VectorField, w=None) -> LinearPart:
    """Linear part of ``X_[0]``, cross-checked against ``(X_lin)_[0]``."""
    _require_vanishing(X)
    if w is not None:
        from .normal_form import reweighted

        X = reweighted(X, w)
    a = linearization(graded_component_vf(X, 0))
    b = graded_component_vf(linearization(X), 0)
    if a != b:
        raise AssertionError("weighted and unweighted linear approximations do not commute")
    return linear_part(a)


def char_poly(L) -> Polynomial:
    """``det(t I - M)`` by Berkowitz' division-free algorithm."""
    M = L.matrix if isinstance(L, LinearPart) else L
    n = len(M)
    if n == 0:
        return Polynomial([1])
    # coefficient vectors are highest degree first during the recursion
    vec = [Fraction(1), -Fraction(M[0][0])]
    for r in range(1, n):
        R = [M[r][j] for j in range(r)]
        C = [M[i][r] for i in range(r)]
        A = [row[:r] for row in M[:r]]
        a = M[r][r]
        # Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        col = [Fraction(1), -Fraction(a)]
        v = C
        for _ in range(r):
            col.append(-sum((x * y for x, y in zip(R, v)), Fraction(0)))
            v = linalg.mat_vec(A, v)
        new = []
        for i in range(r + 2):
            new.append(sum((col[i - j] * vec[j] for j in range(len(vec)) if 0 <= i - j < len(col)), Fraction(0)))
        vec = new
    return Polynomial(list(reversed(vec)))


@dataclass
class Unsupported:
    """Some block has a characteristic polynomial that does not split over Q."""

    factors: dict  # block -> irreducible non-linear factors with multiplicity
    rational: dict  # block -> rational roots found
    reason: str = "characteristic polynomial does not split over Q"

    def __bool__(self):
        return False


def irreducible_factors(p: Polynomial) -> list:
    """``[(factor, multiplicity)]`` over Q for a polynomial without rational roots."""
    import sympy

    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * t**k for k, c in enumerate(p.coeffs))
    _, facs = sympy.factor_list(expr, t, domain="QQ")
    out = []
    for f, m in facs:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(sympy.Poly(f, t).all_coeffs())]
        out.append((Polynomial(coeffs).monic(), int(m)))
    return out


def compatible_ordering(L: LinearPart, w=None):
    """A w-compatible ordering of the eigenvalues, or :class:`Unsupported`.

    Axis ``i`` receives an eigenvalue of its own weight block; within a block
    the eigenvalues are listed in increasing order.
    """
    if not L.is_block_diagonal():
        raise ValueError("linear part is not block diagonal along the weight blocks")
    bs = L.block_structure if w is None else BlockStructure.of(w)
    lam = [None] * L.dimension
    missing, found = {}, {}
    for l in range(bs.m):
        axes = bs.axes(l)
        p = char_poly([[L.matrix[r][c] for c in axes] for r in axes])
        roots = rational_roots(p)
        found[l] = roots
        rest = deflate(p, roots)
        if rest.degree >= 1:
            missing[l] = irreducible_factors(rest)
            continue
        values = sorted(r for r, m in roots.items() for _ in range(m))
        for axis, v in zip(axes, values):
            lam[axis] = v
    if missing:
        return Unsupported(missing, found)
    return lam


def float_ordering(L: LinearPart) -> list:
    """Eigenvalues per block in double precision, sorted by real then imaginary part."""
    import numpy as np

    bs = L.block_structure
    lam = [None] * L.dimension
    for l in range(bs.m):
        axes = bs.axes(l)
        block = np.array([[float(L.matrix[r][c]) for c in axes] for r in axes])
        vals = sorted(np.linalg.eigvals(block), key=lambda z: (round(z.real, 12), z.imag))
        for axis, v in zip(axes, vals):
            lam[axis] = complex(v)
    return lam


@dataclass
class ResonanceReport:
    weighting: Weighting
    lam: list
    k_max: int
    resonances: list = field(default_factory=list)  # (axis, alpha, degree)
    exactness: str = "exact"
    tolerance: float | None = None

    @property
    def is_empty(self) -> bool:
        return not self.resonances

    def degrees(self) -> set:
        return {k for _, _, k in self.resonances}


def _weighting(w) -> Weighting:
    return w if isinstance(w, Weighting) else Weighting(tuple(w))


def enumerate_resonances(lam, w, k_max: int) -> ResonanceReport:
    """All ``(i, alpha)`` with ``<lambda, alpha> = lambda_i`` of weighted degree ``1..k_max``."""
    weighting = _weighting(w)
    lam = [Fraction(v) for v in lam]
    report = ResonanceReport(weighting, lam, k_max)
    for k in range(1, k_max + 1):
        for i, alpha in slice_basis(weighting, k):
            if sum((l * a for l, a in zip(lam, alpha) if a), Fraction(0)) == lam[i]:
                report.resonances.append((i, alpha, k))
    return report


def enumerate_resonances_float(lam, w, k_max: int, tol: float = FLOAT_TOLERANCE) -> ResonanceReport:
    """Heuristic variant for floating-point (possibly complex) eigenvalues."""
    weighting = _weighting(w)
    lam = [complex(v) for v in lam]
    report = ResonanceReport(weighting, lam, k_max, exactness="heuristic", tolerance=tol)
    for k in range(1, k_max + 1):
        for i, alpha in slice_basis(weighting, k):
            s = sum(l * a for l, a in zip(lam, alpha))
            if abs(s - lam[i]) <= tol:
                report.resonances.append((i, alpha, k))
    return report


def imaginary_axis_parts(p: Polynomial):
    """``(A, B)`` with ``p(i t) = A(t) + i B(t)``."""
    re, im = [], []
    unit = [1, 1j, -1, -1j]
    for k, c in enumerate(p.coeffs):
        u = unit[k % 4]
        if u in (1, -1):
            re.append((k, c * int(u.real)))
        else:
            im.append((k, c * int(u.imag)))

    def build(pairs):
        coeffs = [Fraction(0)] * (p.degree + 1)
        for k, c in pairs:
            coeffs[k] = c
        return Polynomial(coeffs)

    return build(re), build(im)


def is_hyperbolic(L) -> bool:
    """No eigenvalue on the imaginary axis, decided exactly.

    ``L`` may be a LinearPart, a square matrix or a characteristic polynomial.
    """
    p = L if isinstance(L, Polynomial) else char_poly(L)
    if p(0) == 0:
        return False
    A, B = imaginary_axis_parts(p)
    g = gcd(A, B)
    return not has_real_root(g)


def nonresonance_implies_hyperbolic_check(X: VectorField, w=None, k_max: int | None = None) -> dict:
    """Consistency of the resonance report with the hyperbolicity verdict.

    A zero eigenvalue ``lambda_j`` always yields the resonance ``(j, 2 e_j)`` of
    weighted degree ``w_j``, so a resonance-free report through that degree
    must come with a nonzero spectrum.
    """
    L = weighted_linear_part(X, w)
    weighting = _weighting(w) if w is not None else X.context.weighting
    k_max = weighting.largest if k_max is None else max(k_max, weighting.largest)
    lam = compatible_ordering(L)
    if isinstance(lam, Unsupported):
        raise ValueError("nonresonance check needs a rational spectrum")
    report = enumerate_resonances(lam, weighting, k_max)
    hyperbolic = is_hyperbolic(L)
    zero_eigen = any(v == 0 for v in lam)
    forced = all(
        (j, tuple(2 * int(a == j) for a in range(len(lam))), weighting[j]) in report.resonances
        for j, v in enumerate(lam)
        if v == 0
    )
    consistent = forced and not (report.is_empty and (zero_eigen or not hyperbolic))
    return {
        "lambda": lam,
        "resonance_free": report.is_empty,
        "zero_eigenvalue": zero_eigen,
        "hyperbolic": hyperbolic,
        "consistent": consistent,
    }

"""Weighted linearization: adjoint matrices, homological equation, Moser flow, oracle."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .errors import LinearizationError, SingularAdjoint
from .series import SeriesContext, Weighting
from .vectorfield import (
    FormalDiffeo,
    TimeVectorField,
    VectorField,
    compose_diffeo,
    evaluate_isotopy,
    exponential_flow,
    flow,
    invert_diffeo,
    jacobian_at_zero,
    lie_bracket,
    pullback_vf,
)
from .weighting import (
    GradedSliceBasis,
    graded_component_vf,
    is_weighted_euler_like,
    require_admissible,
    slice_basis,
    vf_degree,
)


@dataclass
class AdjointMatrix:
    """``ad_{X0}`` on the degree-``degree`` slice; column ``b`` is ``[X0, basis[b]]``."""

    degree: int
    basis: GradedSliceBasis
    entries: list

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def submatrix(self, keep) -> list:
        return [[self.entries[r][c] for c in keep] for r in keep]

    def is_upper_triangular(self) -> bool:
        n = self.dimension
        return all(self.entries[r][c] == 0 for r in range(n) for c in range(r))

    def diagonal(self) -> list:
        return [self.entries[j][j] for j in range(self.dimension)]


@dataclass
class AdjointCheck:
    invertible: bool
    determinant: Fraction
    kernel: list  # coordinate vectors in the slice basis

    def __bool__(self):
        return self.invertible

    def __iter__(self):
        # unpacks as (invertible, kernel)
        return iter((self.invertible, self.kernel))


def _exact_context(X0: VectorField, k: int) -> SeriesContext:
    # every slice-k term has weighted degree w_i + k <= w_n + k
    return X0.context.with_cutoff(k + X0.context.weighting.largest)


def adjoint_matrix(X0: VectorField, k: int) -> AdjointMatrix:
    """Exact matrix of ``ad_{X0}`` on the full (untruncated) degree-``k`` slice."""
    if graded_component_vf(X0, 0) != X0:
        raise ValueError("X0 is not quasi-homogeneous of weighted degree 0")
    ctx = _exact_context(X0, k)
    X0 = X0.to_context(ctx)
    basis = slice_basis(ctx.weighting, k)
    idx = basis.index()
    dim = len(basis)
    entries = [[Fraction(0)] * dim for _ in range(dim)]
    for b in range(dim):
        image = lie_bracket(X0, basis.element(b, ctx))
        for i, alpha, c in image.terms():
            r = idx.get((i, alpha))
            if r is None:
                raise ValueError(
                    f"ad_X0 leaks out of the degree-{k} slice (term x^{alpha} d/dx{i + 1})"
                )
            entries[r][b] = c
    return AdjointMatrix(k, basis, entries)


def is_adjoint_invertible(A: AdjointMatrix) -> AdjointCheck:
    if A.dimension == 0:
        return AdjointCheck(True, Fraction(1), [])
    det = linalg.determinant(A.entries)
    if det != 0:
        return AdjointCheck(True, det, [])
    return AdjointCheck(False, det, linalg.kernel(A.entries))


def kernel_fields(A: AdjointMatrix, kernel, context: SeriesContext) -> list:
    ctx = context.with_cutoff(max(context.cutoff, A.degree + context.weighting.largest))
    return [A.basis.combination(v, ctx) for v in kernel]


def homological_rhs(X_slices, k: int, U_prev) -> VectorField:
    """``(k+1) X_[k+1] - sum_{i<k} [X_[k-i], U_[i+1]]``."""
    ctx = X_slices[0].context
    rhs = _slice(X_slices, k + 1, ctx).scale(k + 1)
    for i in range(k):
        Xs = _slice(X_slices, k - i, ctx)
        if Xs.is_zero() or U_prev[i].is_zero():
            continue
        rhs = rhs - lie_bracket(Xs, U_prev[i])
    return rhs


def _slice(X_slices, j, ctx):
    return X_slices[j] if j < len(X_slices) else VectorField.zero(ctx)


def solve_homological(X_slices, k: int, U_prev, adjoint: AdjointMatrix | None = None) -> VectorField:
    """Solve ``[X_[0], U_[k+1]] = (k+1) X_[k+1] - sum_{i=0}^{k-1} [X_[k-i], U_[i+1]]``.

    ``X_slices[j]`` is ``X_[j]`` and ``U_prev[i]`` is ``U_[i+1]``, all in one
    working context.  Only slice terms below the working cutoff are solved
    for: ``ad_{X0}`` never lowers the weight of the component it lands in, so
    that block of the slice matrix is invertible whenever the whole one is,
    and its solution is the visible part of the true solution.
    """
    ctx = X_slices[0].context
    X0 = X_slices[0]
    degree = k + 1
    if adjoint is None:
        adjoint = adjoint_matrix(X0, degree)
    rhs = homological_rhs(X_slices, k, U_prev)
    w = ctx.weights
    visible = [
        j for j, (i, alpha) in enumerate(adjoint.basis) if vf_degree(i, alpha, w) + w[i] <= ctx.cutoff
    ]
    if not visible:
        return VectorField.zero(ctx)
    sub = adjoint.submatrix(visible)
    full_rhs = adjoint.basis.coordinates(rhs)
    target = [full_rhs[j] for j in visible]
    try:
        coeffs = linalg.solve(sub, target)
    except linalg.SingularMatrix:
        check = is_adjoint_invertible(adjoint)
        raise SingularAdjoint(degree, kernel_fields(adjoint, check.kernel, ctx)) from None
    U = VectorField.from_terms(
        ctx, [(*adjoint.basis[j], c) for j, c in zip(visible, coeffs) if c]
    )
    if lie_bracket(X0, U) != rhs:
        raise ArithmeticError(f"homological equation residual nonzero at degree {degree}")
    return U


@dataclass
class LinearizationResult:
    """Outcome of a weighted linearization.

    ``phi`` satisfies ``phi^* X = X_[0]`` through vector-field degree
    ``cutoff``; ``phi_inverse`` holds the new coordinate functions.
    """

    phi: FormalDiffeo
    phi_inverse: FormalDiffeo
    generator: TimeVectorField
    residual: VectorField
    certificates: list
    linear_part: VectorField
    cutoff: int
    method: str
    checks: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.residual.is_zero()


def working_context(X: VectorField, w=None, N=None) -> tuple:
    """Reinterpret ``X`` at the padded cutoff ``N + w_n``; returns ``(X', N)``."""
    X = reweighted(X, w)
    ctx = X.context
    N = ctx.cutoff if N is None else N
    work = SeriesContext(ctx.weighting, N + ctx.weighting.largest)
    return X.to_context(work), N


def _max_degree(ctx: SeriesContext) -> int:
    # largest slice degree with any term below the working cutoff
    return ctx.cutoff - ctx.weighting.smallest


def _certificate(k, A: AdjointMatrix, check: AdjointCheck) -> dict:
    return {
        "degree": k,
        "dimension": A.dimension,
        "invertible": check.invertible,
        "determinant": check.determinant,
    }


def adjoint_certificates(X0: VectorField, k_max: int, threads: int = 1, stop_on_singular=True):
    """Adjoint matrices and checks for degrees ``1..k_max``.

    Returns ``(matrices, certificates)``; raises SingularAdjoint at the first
    singular degree when ``stop_on_singular``.
    """
    degrees = list(range(1, k_max + 1))

    def job(k):
        A = adjoint_matrix(X0, k)
        return A, is_adjoint_invertible(A)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, degrees))
    else:
        results = []
        for k in degrees:
            results.append(job(k))
            if stop_on_singular and not results[-1][1].invertible:
                break
    matrices, certs = {}, []
    for k, (A, check) in zip(degrees, results):
        matrices[k] = A
        certs.append(_certificate(k, A, check))
        if stop_on_singular and not check.invertible:
            raise SingularAdjoint(k, kernel_fields(A, check.kernel, X0.context))
    return matrices, certs


def _euler_certificates(ctx: SeriesContext, k_max: int) -> list:
    out = []
    for k in range(1, k_max + 1):
        dim = len(slice_basis(ctx.weighting, k))
        out.append({"degree": k, "dimension": dim, "invertible": True, "determinant": Fraction(k) ** dim})
    return out


def moser_equation_defect(X_slices, U) -> list:
    """Degrees ``m`` where ``(m+1) X_[m+1] + sum_{i+j=m} [U_[i+1], X_[j]]`` is nonzero."""
    ctx = X_slices[0].context
    bad = []
    for m in range(len(U)):
        acc = _slice(X_slices, m + 1, ctx).scale(m + 1)
        for i in range(m + 1):
            Xj = _slice(X_slices, m - i, ctx)
            if not Xj.is_zero() and not U[i].is_zero():
                acc = acc + lie_bracket(U[i], Xj)
        if not acc.is_zero():
            bad.append(m)
    return bad


def jacobian_determinant_is_constant(iso) -> bool:
    """``det D_x phi(t, 0)`` is a polynomial in ``t``; compare it at enough points."""
    n = iso.context.dimension
    mats = [jacobian_at_zero(c) for c in iso.coefficients]
    base = linalg.determinant(mats[0])
    for tau in range(1, n * iso.t_degree + 2):
        M = [[sum(Fraction(tau) ** k * m[i][j] for k, m in enumerate(mats)) for j in range(n)] for i in range(n)]
        if linalg.determinant(M) != base:
            return False
    return True


def _finish(X, N, phi_work, U, certs, method, checks=None) -> LinearizationResult:
    ctx = X.context
    X0 = graded_component_vf(X, 0)
    residual = (pullback_vf(phi_work, X) - X0).truncate_vf_degree(N)
    phi_inv = invert_diffeo(phi_work).truncate_vf_degree(N)
    generator = TimeVectorField(ctx, [u.truncate_vf_degree(N) for u in U] or [VectorField.zero(ctx)])
    return LinearizationResult(
        phi=phi_work.truncate_vf_degree(N),
        phi_inverse=phi_inv,
        generator=generator,
        residual=residual,
        certificates=certs,
        linear_part=X0.truncate_vf_degree(N),
        cutoff=N,
        method=method,
        checks=checks or {},
    )


def _flow_to_diffeo(U, ctx, checks):
    if all(u.is_zero() for u in U):
        checks.update(order_bound=True, jacobian_determinant_constant=True)
        return FormalDiffeo.identity(ctx)
    U_t = TimeVectorField(ctx, U)
    iso = flow(U_t, check_order_bound=True)
    checks["order_bound"] = iso.satisfies_order_bound()
    checks["jacobian_determinant_constant"] = jacobian_determinant_is_constant(iso)
    if not checks["jacobian_determinant_constant"]:
        raise ArithmeticError("det D phi(t, 0) varies with t")
    return evaluate_isotopy(iso, 1)


def moser_linearize(X: VectorField, w=None, N=None, threads: int = 1) -> LinearizationResult:
    """Find ``phi`` with ``phi^* X = X_[0]`` through vector-field degree ``N``.

    Solves the homological equations for the generator
    ``U_t = sum_k t^k U_[k+1]``, flows it and evaluates at ``t = 1``.
    Every adjoint operator ``ad_{X_[0]}`` on slices ``1..N + w_n - w_1`` must
    be invertible.
    """
    X, N = working_context(X, w, N)
    ctx = X.context
    require_admissible(X)
    k_max = _max_degree(ctx)
    X_slices = [graded_component_vf(X, j) for j in range(k_max + 1)]
    X0 = X_slices[0]
    matrices, certs = adjoint_certificates(X0, k_max, threads=threads)
    U = []
    for k in range(k_max):
        U.append(solve_homological(X_slices, k, U, adjoint=matrices[k + 1]))
    checks = {"homological_residual_zero": True}
    bad = moser_equation_defect(X_slices, U)
    if bad:
        raise ArithmeticError(f"Moser equation fails at t-degrees {bad}")
    checks["moser_equation"] = True
    phi = _flow_to_diffeo(U, ctx, checks)
    return _finish(X, N, phi, U, certs, "moser", checks)


def euler_like_linearize(X: VectorField, N=None) -> LinearizationResult:
    """Fast path for ``X_[0] = E_w``: the generator is ``U_[k+1] = X_[k+1]``."""
    X, N = working_context(X, None, N)
    ctx = X.context
    if not is_weighted_euler_like(X):
        raise LinearizationError("field is not weighted Euler-like")
    k_max = _max_degree(ctx)
    X_slices = [graded_component_vf(X, j) for j in range(k_max + 1)]
    U = X_slices[1:]
    checks = {"moser_equation": not moser_equation_defect(X_slices, U)}
    if not checks["moser_equation"]:
        raise ArithmeticError("Moser equation fails for the Euler-like generator")
    phi = _flow_to_diffeo(U, ctx, checks)
    return _finish(X, N, phi, U, _euler_certificates(ctx, k_max), "euler", checks)


def iterative_linearize_oracle(X: VectorField, w=None, N=None, threads: int = 1) -> LinearizationResult:
    """Independent check: remove one slice at a time by an exponential conjugation.

    At degree ``k`` solve ``[Y_[0], V] = Y_[k]`` and replace ``Y`` by
    ``exp(V)^* Y``; the composite of the exponentials linearizes ``X``.
    """
    X, N = working_context(X, w, N)
    ctx = X.context
    require_admissible(X)
    k_max = _max_degree(ctx)
    X0 = graded_component_vf(X, 0)
    matrices, certs = adjoint_certificates(X0, k_max, threads=threads)
    Y = X
    total = FormalDiffeo.identity(ctx)
    gens = []
    for k in range(1, k_max + 1):
        Yk = graded_component_vf(Y, k)
        if Yk.is_zero():
            gens.append(VectorField.zero(ctx))
            continue
        V = _solve_slice(X0, Yk, matrices[k])
        gens.append(V)
        step = evaluate_isotopy(exponential_flow(V, ctx.cutoff), 1)
        Y = pullback_vf(step, Y)
        total = compose_diffeo(total, step)
    return _finish(X, N, total, gens, certs, "oracle")


def _solve_slice(X0: VectorField, rhs: VectorField, A: AdjointMatrix) -> VectorField:
    """``[X0, V] = rhs`` on the visible part of one slice."""
    ctx = X0.context
    k = A.degree
    # the homological solver with all intermediate slices zero solves
    # [X0, V] = k * X_[k], so feed it rhs / k
    zero = VectorField.zero(ctx)
    slices = [X0] + [zero] * (k - 1) + [rhs.scale(Fraction(1, k))]
    return solve_homological(slices, k - 1, [zero] * (k - 1), adjoint=A)


def verify_linearization(X: VectorField, phi, w=None, N=None):
    """``(residual, ok)`` with residual ``phi^* X - X_[0]`` through vf-degree ``N``."""
    X, N = working_context(X, w, N)
    comps = phi.components if isinstance(phi, FormalDiffeo) else tuple(phi)
    comps = [c.to_context(X.context) for c in comps]
    residual = (pullback_vf(comps, X) - graded_component_vf(X, 0)).truncate_vf_degree(N)
    return residual, residual.is_zero()


def reweighted(X: VectorField, w=None) -> VectorField:
    """``X`` under weighting ``w`` (same cutoff); ``X`` itself when ``w`` is None."""
    if w is None:
        return X
    weighting = w if isinstance(w, Weighting) else Weighting(tuple(w))
    return X.to_context(SeriesContext(weighting, X.context.cutoff))


def linearize(X: VectorField, w=None, N=None, method: str = "moser", threads: int = 1):
    """Dispatch by method; ``moser`` takes the Euler-like fast path when it applies."""
    X = reweighted(X, w)
    if method == "euler":
        return euler_like_linearize(X, N)
    if method == "oracle":
        return iterative_linearize_oracle(X, N=N, threads=threads)
    if method != "moser":
        raise ValueError(f"unknown method {method!r}")
    if is_weighted_euler_like(X):
        return euler_like_linearize(X, N)
    return moser_linearize(X, N=N, threads=threads)

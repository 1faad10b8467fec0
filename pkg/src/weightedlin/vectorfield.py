"""Formal vector fields, diffeomorphisms, isotopies and their flows.

Conventions
-----------
* A vector field is the tuple of its values on the coordinates,
  ``X = sum_i X^i d/dx^i``.
* A coordinate tuple ``phi`` acts on functions by substitution,
  ``phi(f) = f(phi^1, ..., phi^n)``, and pulls fields back by
  ``(phi^* X)(x) = D phi(x)^{-1} X(phi(x))``.
* Time-dependent objects are finite lists of t-coefficients.  Whenever
  arithmetic in ``t`` is needed, the coefficients are packed into one series
  on ``(t, x^1, ..., x^n)`` where ``t`` carries weight 1 and the cutoff is
  raised by the t-cap, so every t-coefficient keeps its full x-range.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import ContextMismatch, NonEvaluative, NotADiffeo, OrderBoundViolation
from .series import (
    SeriesContext,
    TruncatedSeries,
    Weighting,
    compose,
    format_series,
    reciprocal,
)


class VectorField:
    """A derivation ``sum_i X^i d/dx^i`` with truncated series components."""

    def __init__(self, context: SeriesContext, components: Sequence[TruncatedSeries]):
        components = tuple(components)
        if len(components) != context.dimension:
            raise ValueError(
                f"expected {context.dimension} components, got {len(components)}"
            )
        for c in components:
            if c.context != context:
                raise ContextMismatch(f"component context {c.context} != {context}")
        self.context = context
        self.components = components

    @classmethod
    def zero(cls, context: SeriesContext) -> "VectorField":
        return cls(context, [context.zero()] * context.dimension)

    @classmethod
    def from_terms(cls, context: SeriesContext, terms) -> "VectorField":
        """Build from ``(axis, alpha, coefficient)`` triples."""
        buckets = [dict() for _ in range(context.dimension)]
        for i, alpha, c in terms:
            alpha = tuple(alpha)
            buckets[i][alpha] = buckets[i].get(alpha, 0) + Fraction(c)
        return cls(context, [TruncatedSeries(context, b) for b in buckets])

    @classmethod
    def monomial(cls, context: SeriesContext, axis: int, alpha, c=1) -> "VectorField":
        return cls.from_terms(context, [(axis, alpha, c)])

    @property
    def dimension(self) -> int:
        return self.context.dimension

    def terms(self):
        """Yield ``(axis, alpha, c)`` component by component, canonical order."""
        for i, comp in enumerate(self.components):
            for alpha, c in comp.items():
                yield i, alpha, c

    def __getitem__(self, i) -> TruncatedSeries:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.context == other.context and self.components == other.components

    def __hash__(self):
        return hash((self.context, self.components))

    def __repr__(self):
        return f"VectorField({format_field(self)}, N={self.context.cutoff})"

    def _check(self, other):
        if not isinstance(other, VectorField):
            raise TypeError(f"expected a VectorField, got {type(other).__name__}")
        if other.context != self.context:
            raise ContextMismatch(f"field contexts differ: {self.context} vs {other.context}")

    def __add__(self, other):
        self._check(other)
        return VectorField(self.context, [a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.context, [a - b for a, b in zip(self, other)])

    def __neg__(self):
        return VectorField(self.context, [-a for a in self])

    def scale(self, c) -> "VectorField":
        return VectorField(self.context, [a.scale(c) for a in self])

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        if isinstance(c, TruncatedSeries):
            return VectorField(self.context, [a * c for a in self])
        return NotImplemented

    __rmul__ = __mul__

    def __call__(self, f: TruncatedSeries) -> TruncatedSeries:
        return apply(self, f)

    def bracket(self, other: "VectorField") -> "VectorField":
        return lie_bracket(self, other)

    def filter_terms(self, keep) -> "VectorField":
        """Keep the terms ``x^alpha d/dx^i`` for which ``keep(i, alpha)``."""
        return VectorField(
            self.context,
            [comp.filter(lambda a, i=i: keep(i, a)) for i, comp in enumerate(self.components)],
        )

    def to_context(self, context: SeriesContext) -> "VectorField":
        return VectorField(context, [c.to_context(context) for c in self])

    def with_cutoff(self, cutoff: int) -> "VectorField":
        return self.to_context(self.context.with_cutoff(cutoff))

    def truncate_vf_degree(self, k: int) -> "VectorField":
        """Drop every term of vector-field degree ``<w,alpha> - w_i`` above ``k``."""
        w = self.context.weights
        return self.filter_terms(lambda i, a: sum(x * y for x, y in zip(a, w)) - w[i] <= k)


def format_field(X: VectorField, names: Sequence[str] | None = None) -> str:
    names = names or [f"x{i + 1}" for i in range(X.dimension)]
    parts = []
    for i, comp in enumerate(X.components):
        if comp.is_zero():
            continue
        parts.append(f"({format_series(comp, names)})*d/d{names[i]}")
    return " + ".join(parts) if parts else "0"


# -- derivation calculus --------------------------------------------------------


def apply(X: VectorField, f: TruncatedSeries) -> TruncatedSeries:
    """``X(f) = sum_i X^i df/dx^i``."""
    if f.context != X.context:
        raise ContextMismatch(f"field context {X.context} != series context {f.context}")
    out = X.context.zero()
    for i, comp in enumerate(X.components):
        if comp.is_zero():
            continue
        d = f.partial_derivative(i)
        if not d.is_zero():
            out = out + comp * d
    return out


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Commutator ``[X, Y]``; component ``i`` is ``X(Y^i) - Y(X^i)``."""
    X._check(Y)
    return VectorField(X.context, [apply(X, yi) - apply(Y, xi) for xi, yi in zip(X, Y)])


def jacobian(phi: Sequence[TruncatedSeries]) -> list:
    """Matrix of series with entry ``(i, j) = d phi^i / d x^j``."""
    n = len(phi)
    return [[phi[i].partial_derivative(j) for j in range(n)] for i in range(n)]


def jacobian_at_zero(phi: Sequence[TruncatedSeries]) -> list:
    return [[entry.constant_term() for entry in row] for row in jacobian(phi)]


def is_formal_diffeo(phi: Sequence[TruncatedSeries]):
    """Return ``(ok, reason)`` for the formal inverse function criterion."""
    phi = tuple(phi)
    if not phi:
        return False, "empty tuple"
    for i, p in enumerate(phi):
        c = p.constant_term()
        if c != 0:
            return False, f"component {i + 1} has nonzero constant term {c}"
    det = linalg.determinant(jacobian_at_zero(phi))
    if det == 0:
        return False, "Jacobian at 0 is singular"
    return True, "ok"


class FormalDiffeo:
    """Coordinate tuple with zero constant terms and invertible ``D phi(0)``."""

    def __init__(self, context: SeriesContext, components: Sequence[TruncatedSeries], *, check=True):
        components = tuple(components)
        if len(components) != context.dimension:
            raise ValueError(f"expected {context.dimension} components, got {len(components)}")
        for c in components:
            if c.context != context:
                raise ContextMismatch(f"component context {c.context} != {context}")
        if check:
            ok, why = is_formal_diffeo(components)
            if not ok:
                raise NotADiffeo(why)
        self.context = context
        self.components = components

    @classmethod
    def identity(cls, context: SeriesContext) -> "FormalDiffeo":
        return cls(context, context.variables(), check=False)

    @property
    def dimension(self):
        return self.context.dimension

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        if not isinstance(other, FormalDiffeo):
            return NotImplemented
        return self.context == other.context and self.components == other.components

    def __hash__(self):
        return hash((self.context, self.components))

    def __repr__(self):
        inner = ", ".join(format_series(c) for c in self.components)
        return f"FormalDiffeo(({inner}), N={self.context.cutoff})"

    def jacobian_at_zero(self):
        return jacobian_at_zero(self.components)

    def is_identity(self) -> bool:
        return self.components == self.context.variables()

    def to_context(self, context: SeriesContext) -> "FormalDiffeo":
        return FormalDiffeo(context, [c.to_context(context) for c in self])

    def truncate_vf_degree(self, k: int) -> "FormalDiffeo":
        """Keep component ``i`` through weighted degree ``w_i + k``."""
        w = self.context.weights
        return FormalDiffeo(self.context, [c.truncate(w[i] + k) for i, c in enumerate(self)])


def _components(phi):
    return tuple(phi.components) if isinstance(phi, FormalDiffeo) else tuple(phi)


def compose_diffeo(psi, phi) -> FormalDiffeo:
    """Map composition ``psi o phi``: component ``i`` is ``psi^i(phi(x))``."""
    p, q = _components(psi), _components(phi)
    if p[0].context != q[0].context:
        raise ContextMismatch("diffeomorphisms live in different contexts")
    return FormalDiffeo(q[0].context, [compose(c, q) for c in p])


def invert_diffeo(phi) -> FormalDiffeo:
    """Two-sided inverse, built up one weighted degree band at a time.

    Writing ``phi = L x + h(x)`` with ``L = D phi(0)``, the inverse solves
    ``psi = L^{-1}(x - h(psi))``.  Since ``h`` has no linear terms, each pass
    fixes ``psi`` through ``w_1`` more weighted degrees.
    """
    comps = _components(phi)
    ok, why = is_formal_diffeo(comps)
    if not ok:
        raise NotADiffeo(why)
    ctx = comps[0].context
    n = ctx.dimension
    L = jacobian_at_zero(comps)
    Linv = linalg.inverse(L)
    xs = ctx.variables()
    nonlinear = [c.filter(lambda a: sum(a) >= 2) for c in comps]

    def apply_linear(vec):
        out = []
        for i in range(n):
            acc = ctx.zero()
            for j in range(n):
                if Linv[i][j]:
                    acc = acc + vec[j].scale(Linv[i][j])
            out.append(acc)
        return out

    psi = apply_linear(xs)
    if all(h.is_zero() for h in nonlinear):
        return FormalDiffeo(ctx, psi)
    w1 = ctx.weighting.smallest
    # the error starts in F^{2 w_1} and gains w_1 per pass
    passes = ctx.cutoff // w1 + 1
    for _ in range(passes):
        new = apply_linear([x - compose(h, psi) for x, h in zip(xs, nonlinear)])
        if new == psi:
            break
        psi = new
    return FormalDiffeo(ctx, psi)


def _solve_series_system(matrix, rhs):
    """Solve ``matrix @ z = rhs`` over truncated series by Gauss-Jordan.

    Pivots are chosen among entries with an invertible constant term, which
    exist in every column as long as the constant matrix is invertible.
    """
    n = len(matrix)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col].constant_term() != 0:
                piv = r
                break
        if piv is None:
            raise NotADiffeo("Jacobian series matrix is not invertible")
        a[col], a[piv] = a[piv], a[col]
        inv = reciprocal(a[col][col])
        a[col] = [e * inv for e in a[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f.is_zero():
                continue
            a[r] = [e - f * p for e, p in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def pullback_vf(phi, X: VectorField) -> VectorField:
    """``(phi^* X)(x) = D phi(x)^{-1} [X(phi(x))]``.

    Computed at the context cutoff; for admissible data the slices of
    vector-field degree up to ``cutoff - w_n`` are exact.
    """
    comps = _components(phi)
    if comps[0].context != X.context:
        raise ContextMismatch("diffeomorphism and field live in different contexts")
    pushed = [compose(xi, comps) for xi in X.components]
    return VectorField(X.context, _solve_series_system(jacobian(comps), pushed))


def pullback_function(phi, f: TruncatedSeries) -> TruncatedSeries:
    return compose(f, _components(phi))


# -- time-dependent objects -----------------------------------------------------


def time_context(context: SeriesContext, t_cap: int) -> SeriesContext:
    """Context on ``(t, x)`` with ``t`` of weight 1 and cutoff raised by ``t_cap``."""
    return SeriesContext(Weighting((1,) + context.weights), context.cutoff + t_cap)


def pack_t(coefficients: Sequence[TruncatedSeries], tctx: SeriesContext) -> TruncatedSeries:
    """``sum_k t^k c_k`` as one series on ``(t, x)``."""
    terms = {}
    for k, c in enumerate(coefficients):
        for alpha, v in c._terms.items():
            terms[(k,) + alpha] = v
    return TruncatedSeries(tctx, terms)


def unpack_t(f: TruncatedSeries, context: SeriesContext, t_cap: int) -> list:
    """Inverse of :func:`pack_t`: the t-coefficients ``c_0..c_K`` in ``context``."""
    buckets = [dict() for _ in range(t_cap + 1)]
    for alpha, v in f._terms.items():
        k = alpha[0]
        if k <= t_cap:
            buckets[k][alpha[1:]] = v
    return [TruncatedSeries(context, b) for b in buckets]


def _strip_trailing(items, is_zero):
    items = list(items)
    while len(items) > 1 and is_zero(items[-1]):
        items.pop()
    return items


class TimeVectorField:
    """``X_t = sum_k t^k X_k`` with finitely many coefficients."""

    def __init__(self, context: SeriesContext, coefficients: Sequence[VectorField]):
        coefficients = list(coefficients) or [VectorField.zero(context)]
        for X in coefficients:
            if X.context != context:
                raise ContextMismatch(f"coefficient context {X.context} != {context}")
        self.context = context
        self.coefficients = _strip_trailing(coefficients, VectorField.is_zero)

    @classmethod
    def constant(cls, X: VectorField) -> "TimeVectorField":
        return cls(X.context, [X])

    @property
    def t_degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> VectorField:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return VectorField.zero(self.context)

    def is_time_independent(self) -> bool:
        return len(self.coefficients) == 1

    def evaluate(self, tau) -> VectorField:
        return evaluate_time_vf(self, tau)

    def derivative(self) -> "TimeVectorField":
        """``d/dt``."""
        return TimeVectorField(
            self.context, [X.scale(k) for k, X in enumerate(self.coefficients)][1:]
        )

    def __eq__(self, other):
        if not isinstance(other, TimeVectorField):
            return NotImplemented
        return self.context == other.context and self.coefficients == other.coefficients

    def __neg__(self):
        return TimeVectorField(self.context, [-X for X in self.coefficients])

    def __repr__(self):
        return f"TimeVectorField(t-degree {self.t_degree}, N={self.context.cutoff})"

    def packed(self, t_cap: int) -> list:
        tctx = time_context(self.context, t_cap)
        return [
            pack_t([X.components[i] for X in self.coefficients], tctx)
            for i in range(self.context.dimension)
        ]


def evaluate_time_vf(X_t: TimeVectorField, tau) -> VectorField:
    """``sum_k tau^k X_k``."""
    tau = Fraction(tau)
    out = VectorField.zero(X_t.context)
    power = Fraction(1)
    for X in X_t.coefficients:
        if power:
            out = out + X.scale(power)
        power *= tau
    return out


class Isotopy:
    """``phi(t, x) = sum_k t^k phi_k(x)`` stored through ``t^K``.

    ``tail_vanishes`` records whether every coefficient past the stored ones is
    known to be zero modulo the cutoff; only then can ``t`` be set to a
    nonzero value.
    """

    def __init__(self, context: SeriesContext, coefficients, tail_vanishes=False):
        coefficients = [tuple(c) for c in coefficients]
        if not coefficients:
            raise ValueError("an isotopy needs at least its t^0 coefficient")
        for c in coefficients:
            if len(c) != context.dimension:
                raise ValueError("coefficient tuple has the wrong length")
            for s in c:
                if s.context != context:
                    raise ContextMismatch(f"coefficient context {s.context} != {context}")
        ok, why = is_formal_diffeo(coefficients[0])
        if not ok:
            raise NotADiffeo(f"time-zero slice is not a formal diffeomorphism: {why}")
        self.context = context
        if tail_vanishes:
            coefficients = _strip_trailing(coefficients, lambda c: all(s.is_zero() for s in c))
        self.coefficients = coefficients
        self.tail_vanishes = tail_vanishes

    @property
    def t_degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> tuple:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        if self.tail_vanishes:
            return tuple(self.context.zero() for _ in range(self.context.dimension))
        raise IndexError(f"t^{k} coefficient was not computed")

    def component(self, i: int) -> list:
        """t-coefficients of the ``i``-th component."""
        return [c[i] for c in self.coefficients]

    def time_zero(self) -> FormalDiffeo:
        return FormalDiffeo(self.context, self.coefficients[0])

    def evaluate(self, tau, use_order_bound=False) -> FormalDiffeo:
        return evaluate_isotopy(self, tau, use_order_bound=use_order_bound)

    def packed(self, t_cap: int | None = None) -> list:
        t_cap = self.t_degree if t_cap is None else t_cap
        tctx = time_context(self.context, t_cap)
        return [pack_t(self.component(i), tctx) for i in range(self.context.dimension)]

    def satisfies_order_bound(self) -> bool:
        """Check ``Theta_w(phi_k^i) >= w_i + k`` for every stored ``k >= 1``."""
        return order_bound_violation(self) is None

    def __eq__(self, other):
        if not isinstance(other, Isotopy):
            return NotImplemented
        return self.context == other.context and self.coefficients == other.coefficients

    def __repr__(self):
        return f"Isotopy(t-degree {self.t_degree}, N={self.context.cutoff}, tail_vanishes={self.tail_vanishes})"


def order_bound_violation(iso: Isotopy):
    w = iso.context.weights
    for k, coeff in enumerate(iso.coefficients):
        for i, s in enumerate(coeff):
            if s.order() < w[i] + k:
                return k, i
    return None


def exponential_flow(X: VectorField, t_cap: int) -> Isotopy:
    """Flow of a time-independent field: ``phi_k = X^{o k}(x) / k!``.

    Built with the recursion ``(k + 1) phi_{k+1} = X(phi_k)``.  When some
    ``X^{o k}(x)`` vanishes, all later ones do too and the isotopy is marked
    as having a vanishing tail.
    """
    ctx = X.context
    current = list(ctx.variables())
    coefficients = [tuple(current)]
    tail = False
    for k in range(t_cap + 1):
        nxt = [apply(X, f).scale(Fraction(1, k + 1)) for f in current]
        if all(f.is_zero() for f in nxt):
            tail = True
            break
        if k == t_cap:
            break
        coefficients.append(tuple(nxt))
        current = nxt
    return Isotopy(ctx, coefficients, tail_vanishes=tail)


def meets_flow_order_hypothesis(X_t: TimeVectorField) -> bool:
    """``X_k`` lies in the filtration piece of vf-degree ``>= k + 1`` for every ``k``."""
    w = X_t.context.weights
    for k, X in enumerate(X_t.coefficients):
        for i, alpha, _ in X.terms():
            if sum(a * b for a, b in zip(alpha, w)) - w[i] < k + 1:
                return False
    return True


def flow(X_t, t_cap: int | None = None, check_order_bound: bool = False) -> Isotopy:
    """Flow of a time-dependent field by matching t-coefficients.

    ``phi_0`` is the identity and ``(m + 1) phi_{m+1}`` is the ``t^m``
    coefficient of ``X_t(phi(t, x))``.  When every ``X_k`` has vf-degree at
    least ``k + 1``, the coefficients obey ``Theta_w(phi_k^i) >= w_i + k``, so
    they vanish past ``t^{N - w_1}``; in that case the cap defaults to
    ``N - w_1`` and the tail is certified.  With ``check_order_bound`` the
    bound is asserted on every coefficient produced.
    """
    if isinstance(X_t, VectorField):
        X_t = TimeVectorField.constant(X_t)
    ctx = X_t.context
    n = ctx.dimension
    graded = meets_flow_order_hypothesis(X_t)
    natural_cap = max(ctx.cutoff - ctx.weighting.smallest, 0)
    if t_cap is None:
        if not graded:
            raise ValueError("t_cap is required unless the weighted order hypothesis holds")
        t_cap = natural_cap
    if check_order_bound and not graded:
        raise OrderBoundViolation("field coefficients do not satisfy X_k in F^{k+1}")

    coefficients = [ctx.variables()]
    packed_field = X_t.packed(t_cap)
    for m in range(t_cap):
        tctx = time_context(ctx, m)
        fields_m = [f.to_context(tctx) for f in packed_field]
        phi_m = [pack_t([c[i] for c in coefficients], tctx) for i in range(n)]
        subs = [tctx.variable(0)] + phi_m
        nxt = []
        for i in range(n):
            value = compose(fields_m[i], subs)
            nxt.append(unpack_t(value, ctx, m)[m].scale(Fraction(1, m + 1)))
        coefficients.append(tuple(nxt))
    tail = False
    if graded and t_cap >= natural_cap:
        tail = True
    elif X_t.is_time_independent():
        tail = any(all(s.is_zero() for s in c) for c in coefficients[1:])
    iso = Isotopy(ctx, coefficients, tail_vanishes=tail)
    if check_order_bound:
        bad = order_bound_violation(iso)
        if bad is not None:
            k, i = bad
            raise OrderBoundViolation(
                f"flow coefficient t^{k}, component {i + 1} has weighted order "
                f"{iso.coefficients[k][i].order()} < {ctx.weights[i] + k}"
            )
    return iso


def evaluate_isotopy(iso: Isotopy, tau, use_order_bound: bool = False) -> FormalDiffeo:
    """Set ``t = tau``.

    Allowed when ``tau == 0``, when the isotopy's tail is known to vanish, or
    when the caller vouches for the weighted order bound (checked on the
    stored coefficients, which must then reach ``t^{N - w_1}``).
    """
    tau = Fraction(tau)
    ctx = iso.context
    if tau == 0:
        return iso.time_zero()
    certified = iso.tail_vanishes
    if not certified and use_order_bound:
        cap = ctx.cutoff - ctx.weighting.smallest
        certified = iso.satisfies_order_bound() and iso.t_degree >= cap
    if not certified:
        raise NonEvaluative(
            f"t-coefficients have not vanished by t^{iso.t_degree}; "
            "the isotopy cannot be evaluated at a nonzero time"
        )
    out = []
    for i in range(ctx.dimension):
        acc = ctx.zero()
        power = Fraction(1)
        for c in iso.component(i):
            acc = acc + c.scale(power)
            power *= tau
        out.append(acc)
    ok, why = is_formal_diffeo(out)
    if not ok:
        raise NonEvaluative(f"value at t={tau} is not a formal diffeomorphism: {why}")
    return FormalDiffeo(ctx, out)


def flow_property_defect(iso: Isotopy, X_t: TimeVectorField) -> list:
    """Residuals of ``d/dt phi_t(x^i) = phi_t(X_t(x^i))`` for t-degrees below ``K``.

    Returns one list of coefficient residuals per component; all zero when the
    flow property holds through the stored range.
    """
    ctx = iso.context
    K = iso.t_degree
    tctx = time_context(ctx, K)
    n = ctx.dimension
    phi = iso.packed(K)
    subs = [tctx.variable(0)] + phi
    fields = X_t.packed(K)
    out = []
    for i in range(n):
        lhs = unpack_t(phi[i], ctx, K)
        rhs = unpack_t(compose(fields[i], subs), ctx, K)
        out.append([lhs[m + 1].scale(m + 1) - rhs[m] for m in range(K)])
    return out


def compose_isotopies(psi: Isotopy, phi: Isotopy, t_cap: int) -> Isotopy:
    """Map composition of isotopies t-coefficientwise, ``psi_t o phi_t``."""
    ctx = phi.context
    tctx = time_context(ctx, t_cap)
    p = psi.packed(t_cap)
    q = phi.packed(t_cap)
    p = [f.to_context(tctx) for f in p]
    q = [f.to_context(tctx) for f in q]
    subs = [tctx.variable(0)] + q
    comps = [unpack_t(compose(f, subs), ctx, t_cap) for f in p]
    coefficients = [tuple(comps[i][k] for i in range(ctx.dimension)) for k in range(t_cap + 1)]
    return Isotopy(ctx, coefficients, tail_vanishes=False)


def invert_isotopy(iso: Isotopy, t_cap: int) -> Isotopy:
    """t-coefficientwise inverse: ``psi_t`` with ``psi_t o phi_t = id``."""
    ctx = iso.context
    tctx = time_context(ctx, t_cap)
    phi = [tctx.variable(0)] + [f.to_context(tctx) for f in iso.packed(t_cap)]
    inv = invert_diffeo(phi)
    comps = [unpack_t(f, ctx, t_cap) for f in inv.components[1:]]
    coefficients = [tuple(comps[i][k] for i in range(ctx.dimension)) for k in range(t_cap + 1)]
    return Isotopy(ctx, coefficients, tail_vanishes=False)


def pullback_time_vf(iso: Isotopy, X_t: TimeVectorField, t_cap: int) -> TimeVectorField:
    """``phi_t^* X_t`` computed on ``(t, x)`` with ``t`` held fixed."""
    ctx = X_t.context
    tctx = time_context(ctx, t_cap)
    Phi = [tctx.variable(0)] + [f.to_context(tctx) for f in iso.packed(t_cap)]
    X_aug = VectorField(tctx, [tctx.zero()] + [f.to_context(tctx) for f in X_t.packed(t_cap)])
    Z = pullback_vf(Phi, X_aug)
    comps = [unpack_t(f, ctx, t_cap) for f in Z.components[1:]]
    return TimeVectorField(
        ctx,
        [VectorField(ctx, [comps[i][k] for i in range(ctx.dimension)]) for k in range(t_cap + 1)],
    )

import random
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from conftest import contexts, fields_in, random_field, random_series, series_in
from weightedlin.errors import NonEvaluative, NotADiffeo, OrderBoundViolation
from weightedlin.series import SeriesContext
from weightedlin.vectorfield import (
    FormalDiffeo,
    TimeVectorField,
    VectorField,
    apply,
    compose_diffeo,
    compose_isotopies,
    evaluate_isotopy,
    evaluate_time_vf,
    exponential_flow,
    flow,
    flow_property_defect,
    invert_diffeo,
    invert_isotopy,
    is_formal_diffeo,
    jacobian,
    jacobian_at_zero,
    lie_bracket,
    pullback_function,
    pullback_time_vf,
    pullback_vf,
)

F13 = Fraction(1, 3)


def xy(weights=(1, 2), N=6):
    ctx = SeriesContext.create(weights, N)
    return (ctx,) + ctx.variables()


def test_apply_examples():
    ctx, x, y = xy((2, 3), 8)
    X = VectorField(ctx, [x, y.scale(2)])
    assert apply(X, x - y) == x - y.scale(2)
    assert apply(X, ctx.one()).is_zero()
    E = VectorField(ctx, [x.scale(2), y.scale(3)])
    assert apply(E, x * y) == (x * y).scale(5)


def test_bracket_examples():
    ctx, x, y = xy((2, 3), 8)
    E = VectorField(ctx, [x.scale(2), y.scale(3)])
    P = VectorField.monomial(ctx, 1, (1, 1))
    assert lie_bracket(E, P) == P.scale(2)
    c, a, b = xy((1, 1), 4)
    A = VectorField(c, [b, c.zero()])
    B = VectorField(c, [c.zero(), a])
    assert lie_bracket(A, B) == VectorField(c, [-a, b])


def test_jacobian_examples():
    ctx, x, y = xy()
    phi = (x + (y * y).scale(F13), y)
    assert jacobian_at_zero(phi) == [[1, 0], [0, 1]]
    assert jacobian(ctx.variables()) == [[ctx.one(), ctx.zero()], [ctx.zero(), ctx.one()]]
    c1 = SeriesContext.create((1,), 3)
    (z,) = c1.variables()
    tau = Fraction(2, 5)
    assert jacobian_at_zero((z.scale(1 - tau),)) == [[1 - tau]]


def test_is_formal_diffeo_examples():
    c1 = SeriesContext.create((1,), 3)
    (z,) = c1.variables()
    ok, why = is_formal_diffeo((z + 1,))
    assert not ok and "constant" in why
    ctx, x, y = xy()
    ok, why = is_formal_diffeo((ctx.zero(), ctx.zero()))
    assert not ok and "singular" in why
    assert is_formal_diffeo((x + y, y))[0]
    with pytest.raises(NotADiffeo):
        FormalDiffeo(ctx, (x * x, y))


def test_compose_and_invert_examples():
    ctx, x, y = xy((1, 1), 5)
    phi = FormalDiffeo(ctx, (x + y, y))
    psi = FormalDiffeo(ctx, (x - y, y))
    ident = FormalDiffeo.identity(ctx)
    assert compose_diffeo(ident, phi) == phi
    assert compose_diffeo(phi, ident) == phi
    assert compose_diffeo(psi, phi) == ident
    assert invert_diffeo(phi) == psi
    c1 = SeriesContext.create((1,), 4)
    (z,) = c1.variables()
    assert invert_diffeo(FormalDiffeo(c1, (z.scale(2),))).components == (z.scale(Fraction(1, 2)),)
    c2, a, b = xy((1, 2), 6)
    assert invert_diffeo(FormalDiffeo(c2, (a - (b * b).scale(F13), b))).components == (a + (b * b).scale(F13), b)


@given(st.data())
def test_inverse_is_two_sided(data):
    ctx = data.draw(contexts(max_cutoff=5))
    assume(ctx.cutoff >= ctx.weighting.largest)
    lin = ctx.variables()
    comps = [v + data.draw(series_in(ctx, min_deg=max(2, w + 1), max_terms=3)) for v, w in zip(lin, ctx.weights)]
    phi = FormalDiffeo(ctx, comps)
    psi = invert_diffeo(phi)
    ident = FormalDiffeo.identity(ctx)
    assert compose_diffeo(psi, phi) == ident
    assert compose_diffeo(phi, psi) == ident


def test_pullback_examples():
    ctx, x, y = xy((1, 2), 8)
    E = VectorField(ctx, [x, y.scale(2)])
    X2 = VectorField(ctx, [x + y * y, y.scale(2)])
    assert pullback_vf((x + (y * y).scale(F13), y), X2) == E
    X1 = VectorField(ctx, [x + y, y.scale(2)])
    assert pullback_vf((x + y, y), X1) == E
    assert pullback_vf(FormalDiffeo.identity(ctx), X2) == X2


def _random_diffeo(rng, ctx):
    comps = []
    for i, v in enumerate(ctx.variables()):
        extra = random_series(rng, ctx, nterms=3, min_deg=ctx.weights[i] + 1)
        comps.append(v + extra)
    return FormalDiffeo(ctx, comps)


def _admissible_field(rng, ctx):
    X = random_field(rng, ctx, nterms=3, min_deg=1)
    w = ctx.weights
    return X.filter_terms(lambda i, a: sum(p * q for p, q in zip(a, w)) >= w[i])


def test_pullback_matches_defining_relation():
    rng = random.Random(11)
    for _ in range(40):
        weights = rng.choice([(1, 1), (1, 2), (1, 1, 2), (2, 3)])
        N = rng.randint(2, 5)
        work = SeriesContext.create(weights, N + weights[-1])
        phi = _random_diffeo(rng, work)
        X = _admissible_field(rng, work)
        Y = pullback_vf(phi, X)
        for defect in oracles.pullback_defect(phi, X, Y, N):
            assert defect.is_zero()


def test_pullback_functoriality():
    rng = random.Random(5)
    for _ in range(25):
        weights = rng.choice([(1, 1), (1, 2), (1, 2, 3)])
        N = rng.randint(2, 5)
        work = SeriesContext.create(weights, N + weights[-1])
        phi, psi = _random_diffeo(rng, work), _random_diffeo(rng, work)
        X = _admissible_field(rng, work)
        lhs = pullback_vf(compose_diffeo(psi, phi), X).truncate_vf_degree(N)
        rhs = pullback_vf(phi, pullback_vf(psi, X)).truncate_vf_degree(N)
        assert lhs == rhs


def test_pullback_function_examples():
    rng = random.Random(2)
    ctx = SeriesContext.create((1, 2), 6)
    phi = _random_diffeo(rng, ctx)
    assert pullback_function(phi, ctx.variable(0)) == phi[0]
    assert pullback_function(phi, ctx.constant(3)) == ctx.constant(3)
    for _ in range(20):
        work = SeriesContext.create((1, 2), 8)
        phi = _random_diffeo(rng, work)
        X = _admissible_field(rng, work)
        f = random_series(rng, work, nterms=4, min_deg=1)
        lhs = apply(pullback_vf(phi, X), pullback_function(phi, f))
        rhs = pullback_function(phi, apply(X, f))
        assert lhs.truncate(6) == rhs.truncate(6)


@given(st.data())
def test_leibniz(data):
    ctx = data.draw(contexts(max_cutoff=6))
    X = data.draw(fields_in(ctx))
    f, g = data.draw(series_in(ctx)), data.draw(series_in(ctx))
    # exact modulo the derivative loss of w_n degrees
    top = ctx.cutoff - ctx.weighting.largest
    assert apply(X, f * g).truncate(top) == (apply(X, f) * g + f * apply(X, g)).truncate(top)


@given(st.data())
def test_bracket_matches_oracle(data):
    ctx = data.draw(contexts(max_cutoff=5))
    X, Y = data.draw(fields_in(ctx)), data.draw(fields_in(ctx))
    top = ctx.cutoff - ctx.weighting.largest
    assert lie_bracket(X, Y).truncate_vf_degree(top - ctx.weighting.largest) == oracles.bracket(
        X, Y
    ).truncate_vf_degree(top - ctx.weighting.largest)
    assert lie_bracket(X, X).is_zero()


def test_exponential_flow_examples():
    ctx, x, y = xy((1, 1), 6)
    iso = exponential_flow(VectorField(ctx, [y, ctx.zero()]), 6)
    assert iso.tail_vanishes and iso.t_degree == 1
    assert iso.coefficients[1] == (y, ctx.zero())
    c1 = SeriesContext.create((1,), 8)
    (z,) = c1.variables()
    iso = exponential_flow(VectorField(c1, [z * z]), 5)
    assert [c[0] for c in iso.coefficients] == [z ** (k + 1) for k in range(6)]
    iso = exponential_flow(VectorField(c1, [z]), 5)
    assert [c[0] for c in iso.coefficients] == [z.scale(Fraction(1, _fact(k))) for k in range(6)]
    assert not iso.tail_vanishes


def _fact(k):
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out


def test_flow_examples():
    c1 = SeriesContext.create((1,), 7)
    (z,) = c1.variables()
    iso = flow(TimeVectorField.constant(VectorField(c1, [z * z])), t_cap=6)
    assert [c[0] for c in iso.coefficients] == [z ** (k + 1) for k in range(7)]
    ctx, x, y = xy()
    zero = flow(TimeVectorField(ctx, []), t_cap=3)
    assert all(c == (ctx.zero(), ctx.zero()) for c in zero.coefficients[1:])


def test_flow_order_bound_and_property():
    rng = random.Random(13)
    for _ in range(15):
        weights = rng.choice([(1, 2), (1, 1), (1, 2, 3)])
        ctx = SeriesContext.create(weights, rng.randint(3, 6))
        coeffs = []
        for k in range(3):
            X = random_field(rng, ctx, nterms=2)
            w = ctx.weights
            coeffs.append(X.filter_terms(lambda i, a, k=k: sum(p * q for p, q in zip(a, w)) - w[i] >= k + 1))
        X_t = TimeVectorField(ctx, coeffs)
        iso = flow(X_t, check_order_bound=True)
        assert iso.satisfies_order_bound() and iso.tail_vanishes
        for comp in flow_property_defect(iso, X_t):
            assert all(d.is_zero() for d in comp)


def test_flow_rejects_fields_breaking_the_order_hypothesis():
    c1 = SeriesContext.create((1,), 4)
    (z,) = c1.variables()
    with pytest.raises(OrderBoundViolation):
        flow(TimeVectorField.constant(VectorField(c1, [z])), t_cap=3, check_order_bound=True)


def test_evaluation_examples():
    ctx, x, y = xy((1, 1), 6)
    iso = exponential_flow(VectorField(ctx, [y, ctx.zero()]), 6)
    assert evaluate_isotopy(iso, 1).components == (x + y, y)
    assert evaluate_isotopy(iso, 0).components == (x, y)
    c1 = SeriesContext.create((1,), 3)
    (z,) = c1.variables()
    with pytest.raises(NonEvaluative):
        evaluate_isotopy(exponential_flow(VectorField(c1, [z]), 3), 1)


def test_evaluate_time_vf_examples():
    ctx, x, y = xy()
    Y = VectorField(ctx, [y, x])
    X_t = TimeVectorField(ctx, [VectorField.zero(ctx), Y])
    assert evaluate_time_vf(X_t, 0).is_zero()
    assert evaluate_time_vf(X_t, 2) == Y.scale(2)


def _graded_time_field(rng, ctx, K=2):
    w = ctx.weights
    out = []
    for k in range(K + 1):
        X = random_field(rng, ctx, nterms=2)
        out.append(X.filter_terms(lambda i, a, k=k: sum(p * q for p, q in zip(a, w)) - w[i] >= k + 1))
    return TimeVectorField(ctx, out)


def test_inverse_flow_law():
    rng = random.Random(17)
    for _ in range(8):
        ctx = SeriesContext.create(rng.choice([(1, 1), (1, 2)]), rng.randint(3, 5))
        X_t = _graded_time_field(rng, ctx)
        iso = flow(X_t)
        K = iso.t_degree
        inv = invert_isotopy(iso, K)
        pulled = pullback_time_vf(iso, X_t, K)
        expected = flow(-pulled, t_cap=K)
        for k in range(K + 1):
            assert inv.coefficients[k] == expected.coefficients[k]


def test_time_zero_functoriality():
    rng = random.Random(19)
    for _ in range(8):
        ctx = SeriesContext.create(rng.choice([(1, 1), (1, 2)]), rng.randint(3, 5))
        a, b = flow(_graded_time_field(rng, ctx)), flow(_graded_time_field(rng, ctx))
        K = max(a.t_degree, b.t_degree)
        comp = compose_isotopies(a, b, K)
        assert comp.coefficients[0] == compose_diffeo(a.time_zero(), b.time_zero()).components


def test_evaluation_commutes_with_pullback():
    rng = random.Random(23)
    for _ in range(8):
        weights = rng.choice([(1, 1), (1, 2)])
        N = rng.randint(2, 4)
        ctx = SeriesContext.create(weights, N + weights[-1])
        iso = flow(_graded_time_field(rng, ctx))
        X_t = TimeVectorField(ctx, [_admissible_field(rng, ctx) for _ in range(2)])
        K = iso.t_degree + X_t.t_degree + ctx.cutoff
        pulled = pullback_time_vf(iso, X_t, K)
        for tau in (Fraction(1), Fraction(-1, 2), Fraction(3)):
            lhs = evaluate_time_vf(pulled, tau).truncate_vf_degree(N)
            rhs = pullback_vf(evaluate_isotopy(iso, tau), evaluate_time_vf(X_t, tau)).truncate_vf_degree(N)
            assert lhs == rhs

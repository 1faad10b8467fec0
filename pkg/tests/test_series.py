import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import contexts, series_in
from weightedlin.errors import ContextMismatch
from weightedlin.series import (
    SeriesContext,
    Weighting,
    compose,
    format_series,
    reciprocal,
    theta_w,
    weighted_degree,
)


def test_weighted_degree_examples():
    assert weighted_degree((0, 2), (1, 2)) == 4
    assert weighted_degree((0, 0, 0), (1, 2, 3)) == 0
    assert weighted_degree((1, 1), (2, 3)) == 5
    with pytest.raises(ValueError):
        weighted_degree((1,), (1, 2))


def test_weighting_must_be_positive_and_sorted():
    with pytest.raises(ValueError):
        Weighting((2, 1))
    with pytest.raises(ValueError):
        Weighting((0, 1))
    assert Weighting.trivial(3).weights == (1, 1, 1)


def test_theta_examples():
    ctx = SeriesContext.create((2, 3), 8)
    x, y = ctx.variables()
    assert theta_w(x * x + y) == 3
    assert theta_w(ctx.zero()) == math.inf
    assert theta_w(ctx.one() + x) == 0


def test_ring_examples():
    ctx = SeriesContext.create((1,), 4)
    (x,) = ctx.variables()
    assert (ctx.one() + x) * (ctx.one() - x) == ctx.one() - x * x
    c2 = SeriesContext.create((2, 3), 6)
    a, b = c2.variables()
    assert theta_w(a * b) == 5
    c3 = SeriesContext.create((1, 1), 5)
    u, v = c3.variables()
    assert (u * v**5).is_zero()


def test_partial_derivative_examples():
    ctx = SeriesContext.create((1, 1), 5)
    x, y = ctx.variables()
    assert (x * x * y).partial_derivative(0) == (x * y).scale(2)
    u = x - (y * y).scale(Fraction(1, 3))
    assert u.partial_derivative(1) == y.scale(Fraction(-2, 3))
    assert ctx.constant(7).partial_derivative(0).is_zero()


def test_compose_examples():
    ctx = SeriesContext.create((1, 2), 6)
    x, y = ctx.variables()
    phi = (x + (y * y).scale(Fraction(1, 3)), y)
    assert compose(x, phi) == phi[0]
    assert compose(x + y * y, phi) == x + (y * y).scale(Fraction(4, 3))
    c1 = SeriesContext.create((1,), 7)
    (t,) = c1.variables()
    f = sum((t**k for k in range(8)), c1.zero())
    assert compose(f, (t * t,)) == sum((t ** (2 * k) for k in range(4)), c1.zero())


def test_compose_rejects_constant_terms():
    ctx = SeriesContext.create((1,), 3)
    (x,) = ctx.variables()
    with pytest.raises(ValueError):
        compose(x, (x + 1,))


def test_reciprocal_examples():
    ctx = SeriesContext.create((1,), 5)
    (x,) = ctx.variables()
    assert reciprocal(ctx.one() - x) == sum((x**k for k in range(6)), ctx.zero())
    assert reciprocal(ctx.constant(4)) == ctx.constant(Fraction(1, 4))
    with pytest.raises(ZeroDivisionError):
        reciprocal(x)


def test_context_mismatch():
    a = SeriesContext.create((1, 1), 3).variable(0)
    b = SeriesContext.create((1, 1), 4).variable(0)
    with pytest.raises(ContextMismatch):
        a + b


def test_format_series():
    ctx = SeriesContext.create((1, 2), 6)
    x, y = ctx.variables()
    assert format_series(x - (y * y).scale(Fraction(1, 3)), ["x", "y"]) == "x - 1/3*y^2"
    assert format_series(ctx.zero()) == "0"


@given(st.data())
def test_ring_axioms(data):
    ctx = data.draw(contexts())
    f, g, h = (data.draw(series_in(ctx)) for _ in range(3))
    assert (f + g) * h == f * h + g * h
    assert (f * g) * h == f * (g * h)
    assert f * g == g * f
    assert f - f == ctx.zero()
    for s in (f * g, f + g, f * g * h):
        s.check_invariants()


@given(st.data())
def test_multiplication_matches_oracle(data):
    ctx = data.draw(contexts(max_cutoff=5))
    f, g = data.draw(series_in(ctx)), data.draw(series_in(ctx))
    assert f * g == oracles.mul(f, g)


@given(st.data())
def test_order_is_a_filtration(data):
    ctx = data.draw(contexts())
    f, g = data.draw(series_in(ctx)), data.draw(series_in(ctx))
    assert theta_w(f + g) >= min(theta_w(f), theta_w(g))
    if theta_w(f) + theta_w(g) <= ctx.cutoff:
        assert theta_w(f * g) == theta_w(f) + theta_w(g)


@given(st.data())
def test_compose_matches_oracle_and_is_continuous(data):
    ctx = data.draw(contexts(max_cutoff=5))
    f = data.draw(series_in(ctx))
    # phi^i of order >= w_i, so phi does not lower weighted order
    phi = [data.draw(series_in(ctx, min_deg=w, max_terms=3)) for w in ctx.weights]
    full = compose(f, phi)
    assert full == oracles.compose(f, phi)
    k = data.draw(st.integers(0, ctx.cutoff))
    assert compose(f.truncate(k), phi).truncate(k) == full.truncate(k)


@given(st.data())
def test_reciprocal_property(data):
    ctx = data.draw(contexts())
    f = data.draw(series_in(ctx)) + ctx.constant(data.draw(st.sampled_from([1, -2, Fraction(1, 3)])))
    if f.constant_term() == 0:
        return
    assert f * reciprocal(f) == ctx.one()


def test_negative_power_uses_reciprocal():
    ctx = SeriesContext.create((1,), 4)
    (x,) = ctx.variables()
    assert (ctx.one() + x) ** -1 == reciprocal(ctx.one() + x)

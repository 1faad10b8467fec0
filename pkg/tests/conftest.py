import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from weightedlin.series import SeriesContext, TruncatedSeries
from weightedlin.vectorfield import VectorField

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

WEIGHTINGS = [(1,), (2,), (1, 1), (1, 2), (2, 3), (1, 1, 2), (1, 2, 3), (1, 1, 1)]

small_fraction = st.builds(
    Fraction, st.integers(-5, 5), st.sampled_from([1, 1, 1, 2, 3])
)


def monomials(ctx, max_deg=None, min_deg=0):
    top = ctx.cutoff if max_deg is None else max_deg
    ranges = [range(top // w + 1) for w in ctx.weights]
    return [a for a in product(*ranges) if min_deg <= ctx.degree(a) <= top]


@st.composite
def contexts(draw, max_cutoff=6):
    w = draw(st.sampled_from(WEIGHTINGS))
    return SeriesContext.create(w, draw(st.integers(1, max_cutoff)))


@st.composite
def series_in(draw, ctx, min_deg=0, max_terms=5):
    monos = monomials(ctx, min_deg=min_deg)
    if not monos:
        return ctx.zero()
    chosen = draw(st.lists(st.sampled_from(monos), max_size=max_terms))
    return TruncatedSeries(ctx, {a: draw(small_fraction) for a in chosen})


@st.composite
def fields_in(draw, ctx, max_terms=3):
    return VectorField(ctx, [draw(series_in(ctx, max_terms=max_terms)) for _ in range(ctx.dimension)])


def random_series(rng, ctx, nterms=4, min_deg=0, max_deg=None):
    monos = monomials(ctx, max_deg=max_deg, min_deg=min_deg)
    terms = {}
    for _ in range(nterms):
        if monos:
            terms[rng.choice(monos)] = Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3]))
    return TruncatedSeries(ctx, terms)


def random_field(rng, ctx, nterms=3, min_deg=0):
    return VectorField(ctx, [random_series(rng, ctx, nterms, min_deg) for _ in range(ctx.dimension)])


def random_slice(rng, ctx, k, nterms=3):
    """Random element of the degree-``k`` slice, restricted to the context."""
    from weightedlin.weighting import slice_basis

    basis = [p for p in slice_basis(ctx.weighting, k) if ctx.degree(p[1]) <= ctx.cutoff]
    terms = []
    for _ in range(nterms):
        if basis:
            i, alpha = rng.choice(basis)
            terms.append((i, alpha, Fraction(rng.randint(-3, 3), rng.choice([1, 2]))))
    return VectorField.from_terms(ctx, terms)


@pytest.fixture
def rng():
    return random.Random(20240611)

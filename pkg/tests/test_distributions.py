"""Triangular distribution tests.

Closed-form values are frozen from hand calculation; the sampler is
cross-checked against scipy's triangular distribution and against an
independent rejection sampler (accept-reject under the density), so the
inverse-CDF path never validates itself.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from worknorms.distributions import (
    Triangular,
    make_triangular,
    mean,
    pdf,
    sample,
    sample_array,
)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _scipy_triang(d: Triangular):
    span = d.b - d.a
    return stats.triang((d.c - d.a) / span, loc=d.a, scale=span)


def _pdf_grid(d: Triangular, x: np.ndarray) -> np.ndarray:
    """Vectorized density written independently of the module under test."""
    span = d.b - d.a
    out = np.zeros_like(x)
    left = (x >= d.a) & (x <= d.c) & (d.c > d.a)
    right = (x > d.c) & (x <= d.b) & (d.b > d.c)
    out[left] = 2.0 * (x[left] - d.a) / (span * (d.c - d.a))
    out[right] = 2.0 * (d.b - x[right]) / (span * (d.b - d.c))
    return out


def _rejection_draws(d: Triangular, n: int, rng: np.random.Generator) -> np.ndarray:
    peak = 2.0 / (d.b - d.a)
    chunks = []
    have = 0
    while have < n:
        x = rng.uniform(d.a, d.b, size=n)
        y = rng.uniform(0.0, peak, size=n)
        kept = x[y < _pdf_grid(d, x)]
        chunks.append(kept)
        have += kept.size
    return np.concatenate(chunks)[:n]


class TestFrozenValues:
    def test_pdf_left_branch(self):
        d = make_triangular(0, 3, 9)
        assert pdf(d, 1.0) == pytest.approx(2.0 / 27.0, abs=1e-15)

    def test_pdf_peak(self):
        d = make_triangular(0, 3, 9)
        assert pdf(d, 3.0) == pytest.approx(2.0 / 9.0, abs=1e-15)

    def test_pdf_right_branch(self):
        d = make_triangular(0, 3, 9)
        assert pdf(d, 6.0) == pytest.approx(1.0 / 9.0, abs=1e-15)

    def test_pdf_outside_support(self):
        d = make_triangular(0, 3, 9)
        assert pdf(d, -0.5) == 0.0
        assert pdf(d, 9.5) == 0.0

    def test_sample_symmetric_median_is_mode(self):
        assert sample(make_triangular(0, 5, 10), 0.5) == pytest.approx(5.0, abs=1e-12)

    def test_sample_degenerate_point_mass(self):
        d = make_triangular(0, 0, 0)
        for u in (0.0, 0.3, 1.0):
            assert sample(d, u) == 0.0

    def test_sample_left_branch_closed_form(self):
        # u below the mode's CDF mass lands on the left parabola branch
        assert sample(make_triangular(0, 3, 9), 0.1) == pytest.approx(
            math.sqrt(2.7), abs=1e-12
        )

    def test_mean_values(self):
        assert mean(make_triangular(0, 5, 10)) == 5.0
        assert mean(make_triangular(0, 0, 0)) == 0.0
        assert mean(make_triangular(0, 3, 9)) == 4.0

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            make_triangular(-1, 0, 1)
        with pytest.raises(ValueError):
            make_triangular(2, 1, 3)
        with pytest.raises(ValueError):
            make_triangular(0, 4, 3)


class TestScipyOracle:
    @pytest.mark.parametrize(
        "abc", [(0, 3, 9), (0, 5, 10), (2, 2, 4), (1, 6, 6), (0.5, 2.25, 7.75)]
    )
    def test_pdf_matches_scipy(self, abc):
        d = make_triangular(*abc)
        ref = _scipy_triang(d)
        x = np.linspace(d.a, d.b, 257)
        ours = np.array([pdf(d, xi) for xi in x])
        np.testing.assert_allclose(ours, ref.pdf(x), atol=1e-12)

    @pytest.mark.parametrize("abc", [(0, 3, 9), (0, 5, 10), (2, 2, 4), (1, 6, 6)])
    def test_sample_matches_scipy_ppf(self, abc):
        d = make_triangular(*abc)
        ref = _scipy_triang(d)
        u = np.linspace(0.001, 0.999, 101)
        ours = np.array([sample(d, ui) for ui in u])
        np.testing.assert_allclose(ours, ref.ppf(u), atol=1e-9)


class TestNumericalInvariants:
    @pytest.mark.parametrize("abc", [(0, 3, 9), (0, 5, 10), (2, 2, 4), (1, 6, 6)])
    def test_pdf_integrates_to_one(self, abc):
        d = make_triangular(*abc)
        x = np.linspace(d.a, d.b, 10_001)
        integral = _trapezoid(np.array([pdf(d, xi) for xi in x]), x)
        assert integral == pytest.approx(1.0, abs=1e-6)

    def test_million_draw_bounds_and_mean(self):
        d = make_triangular(0, 3, 9)
        rng = np.random.default_rng(2024)
        u = rng.random(10**6)
        x = sample_array(u, np.full_like(u, d.a), np.full_like(u, d.c),
                         np.full_like(u, d.b))
        assert x.min() >= d.a and x.max() <= d.b
        var = (d.a**2 + d.b**2 + d.c**2 - d.a * d.b - d.a * d.c - d.b * d.c) / 18.0
        se = math.sqrt(var / x.size)
        assert abs(x.mean() - mean(d)) <= 3.0 * se

    def test_inverse_cdf_quantiles_match_rejection_sampler(self):
        # Independent accept-reject draws pin the quantile function; the
        # closed-form sampler evaluated at level q IS that quantile.
        d = make_triangular(0, 3, 9)
        rng = np.random.default_rng(7)
        draws = _rejection_draws(d, 10**6, rng)
        levels = (np.arange(20) + 0.5) / 20.0
        empirical = np.quantile(draws, levels)
        closed_form = np.array([sample(d, q) for q in levels])
        np.testing.assert_allclose(empirical, closed_form, atol=1e-2)


_valid_triangular = st.tuples(
    st.floats(min_value=0.0, max_value=100.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
).map(lambda t: make_triangular(t[0], t[0] + t[1] * t[2] * 10.0, t[0] + t[2] * 10.0))


class TestProperties:
    @given(d=_valid_triangular, u=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=200)
    def test_sample_stays_in_support(self, d, u):
        x = sample(d, u)
        assert d.a <= x <= d.b

    @given(
        d=_valid_triangular,
        u1=st.floats(min_value=0.0, max_value=1.0),
        u2=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=200)
    def test_sample_monotone_in_u(self, d, u1, u2):
        lo, hi = sorted((u1, u2))
        assert sample(d, lo) <= sample(d, hi) + 1e-12

    @given(d=_valid_triangular, u=st.lists(st.floats(min_value=0.0, max_value=1.0),
                                           min_size=1, max_size=32))
    @settings(max_examples=200)
    def test_sample_array_mirrors_scalar_bitwise(self, d, u):
        us = np.array(u)
        vec = sample_array(us, np.full_like(us, d.a), np.full_like(us, d.c),
                           np.full_like(us, d.b))
        scalar = np.array([sample(d, ui) for ui in u])
        assert np.array_equal(vec, scalar)

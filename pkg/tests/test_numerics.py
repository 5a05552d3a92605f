import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from infshare.errors import DuplicateNode, NonFinite, SingularObservedBlock, TooFewSamples
from infshare.numerics import (
    GaussianVector,
    NormalParams,
    chi2_independence,
    correlation,
    gaussian_condition,
    ks_critical,
    ks_distance,
    lagrange_eval,
    mod1,
    sample_stats,
    uniform_cdf,
    wrapped_normal_cdf,
    wrapped_normal_density,
    wrapped_normal_lattice,
    wrapped_normal_theta,
)
from infshare.rng import chunk_sizes, map_chunks, substream


# -- mod 1 ---------------------------------------------------------------------


def test_mod1_examples():
    assert mod1(2.1) == pytest.approx(0.1, abs=1e-12)
    assert mod1(-0.25) == 0.75
    assert mod1(0.0) == 0.0


def test_mod1_rejects_non_finite():
    with pytest.raises(NonFinite):
        mod1(math.inf)
    with pytest.raises(NonFinite):
        mod1(np.array([0.1, math.nan]))


def test_mod1_never_returns_one():
    assert mod1(-1e-18) == 0.0


@given(st.floats(-1e6, 1e6), st.integers(-(2**40), 2**40))
def test_mod1_periodic(x, n):
    a, b = mod1(x + n), mod1(x)
    assert 0.0 <= a < 1.0
    # float spacing of x + n bounds the achievable accuracy
    d = abs(a - b)
    assert min(d, 1.0 - d) <= 4 * np.spacing(abs(x) + abs(n)) + 1e-15


# -- Lagrange ------------------------------------------------------------------


def test_lagrange_examples():
    assert lagrange_eval([(1, 2), (2, 3)], 0) == pytest.approx(1.0)
    assert lagrange_eval([(1, 1), (2, 4), (3, 9)], 4) == pytest.approx(16.0)
    assert lagrange_eval([(1, 1), (2, 4), (3, 9)], 0) == pytest.approx(0.0, abs=1e-12)


def test_lagrange_duplicate_node():
    with pytest.raises(DuplicateNode):
        lagrange_eval([(1, 1), (1, 2)], 0.0)


@settings(max_examples=50)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=7, unique=True), st.data())
def test_lagrange_interpolation_property(xs, data):
    if len(xs) > 1 and np.min(np.diff(np.sort(xs))) < 0.1:
        return  # nearly coincident nodes are legitimately ill-conditioned
    ys = data.draw(st.lists(st.floats(-10, 10), min_size=len(xs), max_size=len(xs)))
    pts = list(zip(xs, ys))
    for x, y in pts:
        assert lagrange_eval(pts, x) == pytest.approx(y, abs=1e-10)


# -- wrapped normal ------------------------------------------------------------


def fourier_side(x, sigma, terms=20):
    """Independent oracle: 1 + 2 sum exp(-2 pi^2 sigma^2 j^2) cos(2 pi j x)."""
    j = np.arange(1, terms + 1)
    return 1.0 + 2.0 * float(np.sum(np.exp(-2 * math.pi**2 * sigma**2 * j**2) * np.cos(2 * math.pi * j * x)))


def test_wrapped_density_spot_values():
    assert wrapped_normal_density(0.0, 0.5) == pytest.approx(fourier_side(0.0, 0.5), abs=1e-12)
    assert wrapped_normal_density(0.5, 0.5) == pytest.approx(0.985616, abs=1e-6)
    # leading three terms of the series
    head = 1 + 2 * math.exp(-(math.pi**2) / 2) + 2 * math.exp(-2 * math.pi**2)
    assert wrapped_normal_density(0.0, 0.5) == pytest.approx(head, abs=1e-12)


def test_wrapped_density_flat_at_sigma_3():
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(wrapped_normal_density(x, 3.0) - 1.0)) <= 1e-15


@pytest.mark.parametrize("sigma", [0.3, 0.5, 1.0, 3.0])
def test_poisson_identity(sigma):
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(wrapped_normal_lattice(x, sigma) - wrapped_normal_theta(x, sigma))) < 1e-10


@pytest.mark.parametrize("sigma", [0.1, 0.3, 0.5, 1.0, 3.0])
def test_wrapped_density_integrates_to_one(sigma):
    x = np.linspace(0, 1, 10**4 + 1)
    assert integrate.simpson(wrapped_normal_density(x, sigma), x=x) == pytest.approx(1.0, abs=1e-8)


def test_wrapped_cdf_matches_quadrature():
    sigma, mean = 0.4, 0.3
    for x in (0.1, 0.5, 0.9):
        q, _ = integrate.quad(lambda t: wrapped_normal_density(t, sigma, mean), 0.0, x)
        assert wrapped_normal_cdf(x, sigma, mean) == pytest.approx(q, abs=1e-10)


def test_wrapped_density_matches_histogram():
    rng = substream(3, 0)
    sigma = 0.4
    u = mod1(sigma * rng.standard_normal(10**6))
    assert ks_distance(u, lambda x: wrapped_normal_cdf(x, sigma)) < ks_critical(u.size, 1e-3)


# -- Gaussian conditioning -----------------------------------------------------


def test_condition_identity_covariance():
    law = gaussian_condition(GaussianVector(np.zeros(3), np.eye(3)), [1, 2], [5.0, -2.0], 0)
    assert (law.mean, law.variance) == (0.0, 1.0)


def test_condition_sum_example():
    joint = GaussianVector(np.zeros(2), np.array([[1.0, 1.0], [1.0, 2.0]]))
    law = gaussian_condition(joint, [1], [0.8], 0)
    assert law.mean == pytest.approx(0.4, abs=1e-15)
    assert law.variance == pytest.approx(0.5, abs=1e-15)


def test_condition_obfuscated_single_share():
    # (s, s + eta + xi)
    joint = GaussianVector(np.zeros(2), np.array([[1.0, 1.0], [1.0, 3.0]]))
    assert gaussian_condition(joint, [1], [0.0], 0).variance == pytest.approx(2 / 3, abs=1e-15)


def test_condition_random_2x2_conjugate():
    rng = substream(0, 7)
    for _ in range(200):
        mu = rng.normal(size=2)
        a, b = rng.uniform(0.2, 3.0, 2)
        rho = rng.uniform(-0.95, 0.95)
        cov = np.array([[a * a, rho * a * b], [rho * a * b, b * b]])
        h = rng.normal()
        law = gaussian_condition(GaussianVector(mu, cov), [1], [h], 0)
        assert law.mean == pytest.approx(mu[0] + rho * a / b * (h - mu[1]), abs=1e-12)
        assert law.variance == pytest.approx(a * a * (1 - rho * rho), abs=1e-12)


def test_condition_singular_block():
    joint = GaussianVector(np.zeros(3), np.array([[1.0, 0, 0], [0, 1.0, 1.0], [0, 1.0, 1.0]]))
    with pytest.raises(SingularObservedBlock):
        gaussian_condition(joint, [1, 2], [0.0, 0.0], 0)


def test_gaussian_vector_rejects_indefinite():
    with pytest.raises(ValueError):
        GaussianVector(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_normal_params_rejects_negative_variance():
    with pytest.raises(ValueError):
        NormalParams(0.0, -1.0)


# -- statistics ----------------------------------------------------------------


def test_ks_examples():
    n = 200
    assert ks_distance(np.arange(n) / n, uniform_cdf) == pytest.approx(1.0 / n)
    assert ks_distance(np.full(100, 0.5), uniform_cdf) == pytest.approx(0.5)
    with pytest.raises(TooFewSamples):
        ks_distance(np.zeros(99), uniform_cdf)


def test_ks_uniform_draws_pass_at_95_percent():
    passed = sum(ks_distance(substream(s, 0).random(10**5), uniform_cdf) < 1.36 / math.sqrt(10**5)
                 for s in range(40))
    assert passed >= 33  # Binomial(40, 0.95): P(X < 33) is about 3e-3


def test_sample_stats_examples():
    assert sample_stats([1, 1, 1]) == (1.0, 0.0)
    assert sample_stats([0, 2]) == (1.0, 2.0)
    with pytest.raises(TooFewSamples):
        sample_stats([1.0])


def test_sample_stats_chunked_matches_numpy():
    x = substream(1, 0).normal(3.0, 2.0, 300_001)
    mean, var = sample_stats(x, chunk=1000)
    assert mean == pytest.approx(np.mean(x), rel=1e-12)
    assert var == pytest.approx(np.var(x, ddof=1), rel=1e-12)


def test_sample_variance_19():
    z = math.sqrt(19) * substream(2, 0).standard_normal(10**6)
    assert sample_stats(z)[1] == pytest.approx(19.0, rel=0.03)


def test_correlation_and_chi2_detect_dependence():
    rng = substream(4, 0)
    a = rng.random(10**5)
    b = rng.random(10**5)
    assert abs(correlation(a, b)) < 3 / math.sqrt(a.size)
    stat, q = chi2_independence(a, b)
    assert stat < q
    stat, q = chi2_independence(a, mod1(a + 0.05 * b))
    assert stat > q


# -- RNG -----------------------------------------------------------------------


def test_substreams_reproducible_and_distinct():
    assert np.array_equal(substream(5, 3).random(4), substream(5, 3).random(4))
    assert not np.array_equal(substream(5, 3).random(4), substream(5, 4).random(4))
    assert not np.array_equal(substream(5, 3).random(4), substream(6, 3).random(4))


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    with pytest.raises(ValueError):
        chunk_sizes(0)


def test_map_chunks_independent_of_workers():
    fn = lambda rng, size: rng.standard_normal(size)  # noqa: E731
    one = np.concatenate(map_chunks(fn, 9, 10_000, chunk=1000, workers=1))
    four = np.concatenate(map_chunks(fn, 9, 10_000, chunk=1000, workers=4))
    assert np.array_equal(one, four)

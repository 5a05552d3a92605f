import math

import numpy as np
import pytest

from infshare.errors import DuplicateNode, NotFractional, WrongShareCount
from infshare.numerics import circular_distance, gaussian_condition, ks_critical, ks_distance, sample_stats, wrapped_normal_cdf
from infshare.harness.suites import random_gauss_instance
from infshare.rng import substream
from infshare.schemes.gauss import (
    GaussThresholdScheme,
    L2Scheme,
    RandomDegreeScheme,
    ajtai_bound,
    ajtai_secrecy_gap,
    secret_variance_factor,
)


def test_line_through_anchors():
    s = GaussThresholdScheme(2, (2.0,))
    # anchors f(1/2) = 1, f(1) = 0
    vals = np.array([1.0, 0.0])
    assert s.weights(0.0) @ vals == pytest.approx(2.0)
    assert s.weights(2.0) @ vals == pytest.approx(-2.0)
    assert s.recover([(0.5, 1.0), (2.0, -2.0)]) == pytest.approx(2.0)


@pytest.mark.parametrize("k,factor", [(2, 5), (3, 19), (4, 69)])
def test_secret_variance_factor(k, factor):
    assert secret_variance_factor(k) == factor
    w = GaussThresholdScheme(k, ()).weights(0.0)
    assert float(w @ w) == pytest.approx(factor, rel=1e-12)


def test_secret_variance_simulated():
    s = GaussThresholdScheme(3, (0.5, 1.5, 2.5))
    secret, _ = s.sample(substream(0, 0), 2 * 10**5)
    assert sample_stats(secret)[1] == pytest.approx(19.0, rel=0.03)


def test_recover_exact_and_errors():
    s = GaussThresholdScheme(3, (0.5, 1.5, 2.5, -1.0))
    secret, shares = s.sample(substream(1, 0), 10**4)
    w = s.weights(0.0) @ np.linalg.inv(s.weights(np.asarray(s.labels[:3])))
    assert np.max(np.abs(shares[:, :3] @ w - secret)) < 1e-8
    d = s.deal(substream(1, 1))
    pairs = [(s.labels[i], d.shares[i]) for i in (0, 1, 3)]
    assert s.recover(pairs) == pytest.approx(d.secret, abs=1e-8)
    with pytest.raises(WrongShareCount):
        s.recover(pairs[:2])
    with pytest.raises(DuplicateNode):
        s.recover([pairs[0], pairs[0], pairs[1]])


def test_invariants():
    with pytest.raises(ValueError):
        GaussThresholdScheme(1, ())
    with pytest.raises(ValueError):
        GaussThresholdScheme(2, (0.0,))
    with pytest.raises(ValueError):
        GaussThresholdScheme(2, (1.0, 1.0))
    with pytest.raises(ValueError):
        GaussThresholdScheme(2, (0.5,), fractional_secret=True)


def test_conditional_matches_oracle():
    rng = substream(2, 0)
    for _ in range(100):
        s, labels = random_gauss_instance(rng)
        hs = rng.normal(size=len(labels))
        cond = s.conditional(list(zip(labels, hs)))
        oracle = gaussian_condition(s.joint(labels), range(1, s.k), hs, 0)
        assert cond.law.mean == pytest.approx(oracle.mean, abs=1e-9)
        assert cond.law.variance == pytest.approx(oracle.variance, abs=1e-9)
        assert cond.law.variance == pytest.approx(s.sigma**2 / cond.A_sq, rel=1e-12)


def test_conditional_k2_spot_value():
    for sigma in (1.0, 1.7):
        s = GaussThresholdScheme(2, (1.0,), sigma=sigma)
        law = s.conditional([(1.0, 0.3)]).law
        # A^2 = sum_l ((p - l/2) / p)^2 = 1/4 at p = 1
        assert law.variance == pytest.approx(4 * sigma**2, rel=1e-12)
        assert law.variance == pytest.approx(s.conditional_variance([1.0]), rel=1e-12)


def test_conditional_wrong_count():
    with pytest.raises(WrongShareCount):
        GaussThresholdScheme(3, ()).conditional([(1.0, 0.0)])


def test_conditional_variance_ignores_share_values():
    rng = substream(3, 0)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        labels = tuple(1.0 + rng.choice(np.arange(1, 80), k - 1, replace=False) / 10)
        s = GaussThresholdScheme(k, labels)
        v1 = s.conditional(list(zip(labels, rng.normal(size=k - 1)))).law.variance
        v2 = s.conditional(list(zip(labels, 5 * rng.normal(size=k - 1)))).law.variance
        assert abs(v1 - v2) <= 1e-12
        assert v1 > s.sigma**2 / k


def test_conditional_residual_simulated():
    s = GaussThresholdScheme(3, (0.5, 1.5))
    secret, shares = s.sample(substream(4, 0), 2 * 10**5)
    cond = s.conditional([(0.5, 0.0), (1.5, 0.0)])
    # the conditional mean is linear in the shares
    basis = [s.conditional([(0.5, e0), (1.5, e1)]).law.mean for e0, e1 in ((1, 0), (0, 1))]
    resid = secret - shares @ np.asarray(basis)
    assert sample_stats(resid)[1] == pytest.approx(cond.law.variance, rel=0.03)


def test_small_label_trend():
    # variance of the secret given shares at tiny labels scales like (p1 p2)^2
    s = GaussThresholdScheme(3, ())
    base = (4e-3, 9e-3)
    ratios = [s.conditional_variance([p * f for p in base]) / (base[0] * base[1] * f * f) ** 2 for f in (1.0, 0.1)]
    assert all(0.1 < r < 10 for r in ratios)


def test_ajtai_gap_lambda_half():
    s = GaussThresholdScheme.ajtai_dwork(2, 0.5, (1.5, 2.5))
    gap = ajtai_secrecy_gap(s, 0.5)
    assert gap.bound == pytest.approx(4 * math.exp(-(math.pi**2) / 2))
    assert gap.gap < gap.bound
    assert gap.conditional_variance >= 0.25
    assert gap.unconditional_variance == pytest.approx(0.5 * 5)


def test_ajtai_gap_lambda_three():
    s = GaussThresholdScheme.ajtai_dwork(2, 3.0, (1.5, 2.5))
    assert ajtai_secrecy_gap(s, 3.0).gap < 1e-70
    assert ajtai_bound(3.0) < 1e-70


def test_ajtai_unconditional_floor():
    s = GaussThresholdScheme.ajtai_dwork(3, 0.5, (1.5, 2.5))
    assert s.secret_variance == pytest.approx(19 * 0.75)
    assert s.secret_variance >= 0.25 * 3 * 8


def test_ajtai_requires_fractional():
    with pytest.raises(NotFractional):
        ajtai_secrecy_gap(GaussThresholdScheme(2, (1.5,)), 0.5)
    with pytest.raises(ValueError):
        GaussThresholdScheme.ajtai_dwork(2, 0.0, (1.5,))


def test_ajtai_secret_is_wrapped_normal():
    s = GaussThresholdScheme.ajtai_dwork(2, 0.5, (1.5, 2.5))
    secret, _ = s.sample(substream(5, 0), 10**5)
    sd = math.sqrt(s.secret_variance)
    assert ks_distance(secret, lambda x: wrapped_normal_cdf(x, sd)) < ks_critical(secret.size, 1e-3)


def test_random_degree_frequencies():
    s = RandomDegreeScheme(0.5, (1.5, 2.5, 3.5, 4.5, 5.5))
    assert s.probabilities.sum() == pytest.approx(1.0)
    assert s.renormalization == pytest.approx(1 / (1 - 2.0**-11))
    _, _, ks = s.sample(substream(6, 0), 10**5)
    assert np.mean(ks == 2) == pytest.approx(0.5, abs=0.01)


def test_random_degree_recovery_when_degree_small():
    labels = (1.5, 2.5, 3.5, 4.5, 5.5)
    s = RandomDegreeScheme(0.5, labels)
    secret, shares, ks = s.sample(substream(7, 0), 20000)
    rows = np.flatnonzero(ks <= len(labels))
    branch = GaussThresholdScheme.ajtai_dwork(len(labels), 0.5, labels)
    rec = np.array([branch.recover(list(zip(labels, shares[i]))) for i in rows[:2000]])
    assert np.max(circular_distance(rec, secret[rows[:2000]])) < 1e-8


def test_random_degree_density_floor():
    s = RandomDegreeScheme(0.5, (1.5, 2.5, 3.5, 4.5, 5.5))
    labels = (1.5, 2.5, 3.5)
    assert s.density_floor(labels) >= 2.0**-3
    for k in range(4, s.max_k + 1):
        assert s.branch_floor(k, labels) >= 1 - ajtai_bound(0.5)


def test_l2_geometric():
    s = L2Scheme.geometric(20)
    assert s.total_variance == pytest.approx(1 / 3, rel=1e-9)
    secret, h = s.sample(substream(8, 0), 2 * 10**5)
    assert sample_stats(secret)[1] == pytest.approx(1 / 3, rel=0.03)
    assert np.max(np.abs(h.sum(axis=1) - secret)) < 1e-12
    for i in (1, 2):
        resid = secret - (h.sum(axis=1) - h[:, i - 1])
        assert sample_stats(resid)[1] == pytest.approx(s.sigmas[i - 1] ** 2, rel=0.03)


def test_l2_fractional_gap():
    s = L2Scheme.geometric(20, fractional_secret=True)
    ca = s.fractional_gap(1)
    assert 0 < ca.c < 1
    assert ca.max_ratio <= 1 / ca.c
    assert ca.min_ratio >= ca.c
    wide = L2Scheme((3.0, 0.25), fractional_secret=True).fractional_gap(1)
    assert wide.c == pytest.approx(1.0, abs=1e-9)


def test_l2_invariants():
    with pytest.raises(ValueError):
        L2Scheme((1.0, 0.0))

import math

import numpy as np
import pytest

from infshare.errors import BadLabel, EmptySubset
from infshare.numerics import GaussianVector, correlation, gaussian_condition, sample_stats
from infshare.rng import substream
from infshare.schemes import wiener
from infshare.schemes.wiener import DenseScheme, LimitScheme, TreeScheme


def grid_oracle(M, idx, vals):
    """Condition (integral, W at idx) explicitly with the min(s, t) covariance."""
    t = np.arange(M + 1) / M
    K = np.minimum.outer(t, t)
    w = wiener.trapezoid_weights(M)
    rows = np.vstack([w, np.eye(M + 1)[idx]])
    joint = GaussianVector(np.zeros(rows.shape[0]), rows @ K @ rows.T)
    return gaussian_condition(joint, range(1, len(idx) + 1), vals, 0)


def test_path_starts_at_zero_and_grid():
    p = wiener.wiener_sample(64, substream(0, 0))
    assert p.M == 64 and p.values[0] == 0.0
    with pytest.raises(ValueError):
        wiener.WienerPath(np.linspace(0, 1, 3), np.array([1.0, 0.0, 0.0]))


def test_path_functionals_match_paths():
    F = substream(1, 1).normal(size=(257, 3))
    a = wiener.wiener_paths(256, 40, substream(1, 0)) @ F
    b = wiener.path_functionals(256, 40, substream(1, 0), F)
    assert np.max(np.abs(a - b)) < 1e-12


def test_path_moments():
    paths = wiener.wiener_paths(256, 40_000, substream(2, 0))
    assert sample_stats(paths[:, -1])[1] == pytest.approx(1.0, rel=0.03)
    assert float(np.mean(paths[:, 64] * paths[:, 192])) == pytest.approx(0.25, abs=0.02)
    assert sample_stats(wiener.trapezoid(paths))[1] == pytest.approx(1 / 3 - 1 / (12 * 256**2), rel=0.03)


def test_independent_increments():
    paths = wiener.wiener_paths(128, 50_000, substream(3, 0))
    a = paths[:, 40] - paths[:, 10]
    b = paths[:, 100] - paths[:, 60]
    assert abs(correlation(a, b)) < 3 / math.sqrt(a.size)


def test_gap_variance_formulas():
    M = 1 << 14
    g = 0.25
    assert wiener.bridge_gap_variance(int(g * M), M) == pytest.approx(g**3 / 12, rel=1e-6)
    assert wiener.free_gap_variance(int(g * M), M) == pytest.approx(g**3 / 3, rel=1e-6)
    assert wiener.bridge_gap_variance(1, M) == 0.0


def test_recover_matches_explicit_conditioning():
    rng = substream(4, 0)
    M = 32
    for _ in range(20):
        idx = np.sort(rng.choice(np.arange(1, M + 1), int(rng.integers(1, 12)), replace=False))
        vals = rng.normal(size=idx.size)
        rec = wiener.integral_recover(idx, vals, M)
        oracle = grid_oracle(M, idx, vals)
        assert rec.estimate == pytest.approx(oracle.mean, abs=1e-10)
        assert rec.conditional_variance == pytest.approx(oracle.variance, abs=1e-10)


def test_recover_rejects_bad_indices():
    with pytest.raises(ValueError):
        wiener.integral_recover([3, 3], [0.0, 0.0], 8)
    with pytest.raises(ValueError):
        wiener.integral_recover([9], [0.0], 8)


def test_full_grid_recovers_exactly():
    s = DenseScheme(256)
    d = s.deal(substream(5, 0))
    rec = s.recover(d.shares)
    assert rec.estimate == pytest.approx(d.secret, abs=1e-12)
    assert rec.conditional_variance == 0.0 and rec.qualified


def test_gap_qualification_threshold():
    M = 1024
    narrow = DenseScheme.with_gaps([(0.5, 0.5 + 2.0**-11)], M, epsilon_dense=2.0**-10)
    wide = DenseScheme.with_gaps([(0.5, 0.75)], M, epsilon_dense=2.0**-10)
    zeros = lambda s: {i: 0.0 for i in s.participants}  # noqa: E731
    assert narrow.recover(zeros(narrow)).qualified
    assert not wide.recover(zeros(wide)).qualified


def test_terminal_gap_drops_endpoint():
    s = DenseScheme.with_gaps([(0.75, 1.0)], 64)
    assert max(s.participants) == 48
    rec = s.recover({i: 0.0 for i in s.participants})
    assert rec.conditional_variance == pytest.approx(wiener.free_gap_variance(16, 64))


def test_refinement_never_increases_variance():
    rng = substream(6, 0)
    M = 512
    idx = rng.choice(np.arange(1, M + 1), 60, replace=False)
    prev = math.inf
    for m in range(1, idx.size + 1):
        v = wiener.integral_recover(idx[:m], np.zeros(m), M).conditional_variance
        assert v <= prev + 1e-15
        prev = v


def test_parse_gaps():
    assert wiener.parse_gaps("0.2:0.3, 0.6:0.65") == [(0.2, 0.3), (0.6, 0.65)]
    for bad in ("0.3", "0.5:0.4", "0.5:1.5"):
        with pytest.raises(ValueError):
            wiener.parse_gaps(bad)


def test_tree_map_values():
    assert wiener.tree_map(()) == 0.5
    assert wiener.tree_map((1,)) == 0.75
    assert wiener.tree_map((-1, -1)) == 0.125
    with pytest.raises(BadLabel):
        wiener.tree_map((0,))


def test_tree_times_distinct_and_interior():
    times = [wiener.tree_map(lab) for lab in wiener.tree_labels(6)]
    assert len(set(times)) == len(times) == 2**7 - 1
    assert 0 < min(times) and max(times) < 1


def test_tree_subtree_rule():
    s = TreeScheme(depth=4, M=256)
    everyone = list(range(len(s.labels)))
    assert not s.misses_subtree(everyone)
    lo, hi = wiener.subtree_interval((1,))
    subset = [i for i, lab in enumerate(s.labels) if not lo < wiener.tree_map(lab) < hi]
    assert s.misses_subtree(subset)
    d = s.deal(substream(7, 0))
    assert s.recover(d.shares).qualified
    assert not s.recover({i: d.shares[i] for i in subset}).qualified


def test_tree_grid_requirement():
    with pytest.raises(ValueError):
        TreeScheme(depth=4, M=48)


def test_tree_residual_variance_simulated():
    s = TreeScheme(depth=3, M=64)
    grid = sorted(s.grid_index.values())
    w = wiener.trapezoid_weights(64) - wiener.estimate_weights(grid, 64)
    resid = wiener.path_functionals(64, 100_000, substream(8, 0), w[:, None])[:, 0]
    expected = wiener.integral_recover(grid, np.zeros(len(grid)), 64).conditional_variance
    assert sample_stats(resid)[1] == pytest.approx(expected, rel=0.05)


def test_limit_scheme():
    s = LimitScheme.harmonic(8)
    assert s.times[0] == 0.0 and s.times[-1] == pytest.approx(1 - 1 / 8)
    assert s.recover({7: 0.4, 2: 1.0}).conditional_variance == pytest.approx(1 / 8)
    assert s.recover({7: 0.4, 2: 1.0}).estimate == 0.4
    w1, w = s.sample(substream(9, 0), 100_000)
    assert sample_stats(w1 - w[:, -1])[1] == pytest.approx(1 / 8, rel=0.05)
    seq = [LimitScheme.harmonic(m).recover({m - 1: 0.0}).conditional_variance for m in range(1, 40)]
    assert all(b < a for a, b in zip(seq, seq[1:]))
    with pytest.raises(EmptySubset):
        s.recover({})
    for bad in ((), (0.5, 0.5), (1.0,)):
        with pytest.raises(ValueError):
            LimitScheme(bad)

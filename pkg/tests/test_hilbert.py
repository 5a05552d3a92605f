import numpy as np
import pytest

from infshare import hilbert
from infshare.errors import EmptySubset, IllConditioned, NotQualified
from infshare.harness.suites import unification_gaps
from infshare.numerics import sample_stats
from infshare.rng import substream
from infshare.schemes import stat
from infshare.schemes.gauss import GaussThresholdScheme, L2Scheme
from infshare.schemes.wiener import LimitScheme


def two_dim():
    return hilbert.HilbertProgram(np.array([1.0, 0.0]), {0: [[1.0, 1.0]], 1: [[0.0, 1.0]]})


def test_two_dim_example():
    p = two_dim()
    ok, split = p.qualify([0])
    assert not ok
    assert split.residual_variance == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(split.v, (0.5, 0.5)) and np.allclose(split.w, (0.5, -0.5))
    ok, split = p.qualify([0, 1])
    assert ok and split.residual_variance == pytest.approx(0.0, abs=1e-30)


def test_full_span_recovers():
    p = two_dim()
    d = p.deal(substream(0, 0))
    assert p.recover([0, 1], d.shares) == pytest.approx(d.secret, abs=1e-12)
    with pytest.raises(NotQualified):
        p.recover([0], d.shares)
    with pytest.raises(EmptySubset):
        p.qualify([])


def test_residual_matches_simulation():
    p = two_dim()
    secret, shares = p.sample(substream(1, 0), 10**5)
    lam, _ = p.coefficients([0])
    resid = secret - shares[0][:, 0] * lam[0]
    assert sample_stats(resid)[1] == pytest.approx(0.5, rel=0.03)


def test_ill_conditioned():
    eps = 1e-14
    p = hilbert.HilbertProgram(np.array([1.0, 0.0]), {0: [[1.0, eps]], 1: [[1.0, 0.0]], 2: [[1.0, 2 * eps]]})
    assert p.qualify([0, 1])[0]
    with pytest.raises(IllConditioned):
        p.recover([0, 2], {0: (1.0,), 2: (1.0,)})


def test_orthonormal_basis_drops_dependent_rows():
    b = hilbert.orthonormal_basis(np.array([[1.0, 0, 0], [2.0, 0, 0], [1.0, 1.0, 0]]))
    assert b.shape == (2, 3)
    assert np.allclose(b @ b.T, np.eye(2))


def test_program_invariants():
    with pytest.raises(ValueError):
        hilbert.HilbertProgram(np.zeros(2), {0: [[1.0, 0.0]]})
    with pytest.raises(ValueError):
        hilbert.HilbertProgram(np.ones(2), {0: [[1.0, 0.0, 0.0]]})
    with pytest.raises(ValueError):
        hilbert.HilbertProgram(np.ones(2), {0: [[0.0, 0.0]]})


def test_text_roundtrip():
    p = hilbert.table_program((1.0, 2.5, 7.0))
    q = hilbert.loads(hilbert.dumps(p))
    assert np.array_equal(q.goal, p.goal)
    assert q.participants == p.participants
    assert all(np.array_equal(q.subspaces[i], p.subspaces[i]) for i in p.participants)


def test_loads_comments_and_multiple_vectors():
    p = hilbert.loads("# demo\ndim 3\ngoal 1 0 0\n\n0 1 1 0  # first\n0 0 0 1\n1 0 1 0\n")
    assert p.subspaces[0].shape == (2, 3)
    assert p.qualify([0, 1])[0]


@pytest.mark.parametrize("text,line", [
    ("dims 2\n", 1),
    ("dim 2\ngoal 1\n", 2),
    ("dim 2\ngoal 1 0\n0 1 x\n", 3),
    ("dim 2\ngoal 1 0\n\n0 1 0 0\n", 4),
])
def test_loads_reports_line(text, line):
    with pytest.raises(ValueError, match=f"line {line}:"):
        hilbert.loads(text)


def test_loads_missing_goal():
    with pytest.raises(ValueError):
        hilbert.loads("dim 2\n")


def test_table_program_matches_stat2():
    rng = substream(2, 0)
    for _ in range(30):
        r = rng.uniform(1.0, 10.0, int(rng.integers(1, 8)))
        prog = hilbert.table_program(r)
        assert prog.residual_variance(range(r.size)) == pytest.approx(stat.stat2_variance(r), abs=1e-9)


def test_gauss_threshold_program():
    g = GaussThresholdScheme(3, (0.5, 1.5, 2.5, -1.0), sigma=1.3)
    prog = hilbert.from_gauss_threshold(g)
    assert prog.residual_variance([0, 2]) == pytest.approx(g.conditional_variance([0.5, 2.5]), abs=1e-8)
    assert prog.qualify([0, 1, 3])[0]
    d = g.deal(substream(3, 0))
    shares = {i: (d.shares[i],) for i in range(4)}
    assert prog.recover([0, 1, 3], shares) == pytest.approx(d.secret, abs=1e-8)


def test_l2_and_noisy_programs():
    l2 = L2Scheme.geometric(6)
    prog = hilbert.from_l2(l2)
    assert prog.residual_variance([1, 2, 4, 5, 6]) == pytest.approx(l2.sigmas[2] ** 2, abs=1e-12)
    assert prog.qualify(range(1, 7))[0]
    noisy = hilbert.from_noisy(5)
    assert noisy.residual_variance(range(3)) == pytest.approx(0.25, abs=1e-12)


def test_wiener_limit_program():
    lim = LimitScheme.harmonic(6)
    prog = hilbert.from_wiener_limit(lim.times)
    assert 0 not in prog.participants
    for m in range(2, 7):
        assert prog.residual_variance(range(1, m)) == pytest.approx(1 / m, abs=1e-12)  # latest time 1 - 1/m


def test_unification_gaps():
    gaps = unification_gaps()
    assert set(gaps) >= {"gauss_threshold", "l2", "noisy", "obfuscated", "wiener_limit"}
    assert max(gaps.values()) < 1e-8

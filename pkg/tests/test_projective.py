import math

import numpy as np
import pytest
from scipy import integrate, stats

from infshare.errors import CoincidentPoints
from infshare.numerics import ks_critical, ks_distance, uniform_cdf
from infshare.rng import substream
from infshare.schemes import projective
from infshare.schemes.projective import ProjLine, ProjPoint, ProjectiveScheme, canonicalize, meet

SCHEME = ProjectiveScheme.standard(5)
PART = 2  # the participant line perpendicular to ell


def test_canonical_form():
    p = ProjPoint((-3.0, 0.0, 4.0))
    assert np.allclose(p.array, (0.6, 0.0, -0.8))
    assert ProjPoint((0.0, -1.0, 0.0)).close_to(ProjPoint((0.0, 1.0, 0.0)))
    assert np.allclose(canonicalize(np.array([0.0, 0.0, -2.0])), (0, 0, 1))


def test_meet_example():
    assert np.allclose(meet(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])), (0, 1, 0))


def test_meet_incident_to_both_lines():
    rng = substream(0, 0)
    a, b = rng.normal(size=(2, 1000, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    pts = meet(a, b)
    assert np.max(np.abs(np.sum(pts * a, axis=1))) < 1e-12
    assert np.max(np.abs(np.sum(pts * b, axis=1))) < 1e-12


def test_scheme_invariants():
    q = ProjPoint((0.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        ProjectiveScheme(q, ProjLine((0.0, 0.0, 1.0)), ())  # ell misses Q
    with pytest.raises(ValueError):
        ProjectiveScheme(q, ProjLine((1.0, 0.0, 0.0)), (ProjLine((1.0, 0.0, 0.0)),))


def test_incidence_and_recovery():
    secrets, shares, t = SCHEME.sample(substream(1, 0), 10**4)
    assert np.max(np.abs(np.einsum("tpj,pj->tp", shares, SCHEME.normals))) < 1e-9
    assert np.max(np.abs(np.einsum("tpj,tj->tp", shares, t))) < 1e-9
    for row in range(0, 10**4, 97):
        got = SCHEME.recover((0, shares[row, 0]), (3, shares[row, 3]))
        assert projective.projective_distance(got.array, secrets[row]) < 1e-9


def test_recover_coincident_points():
    d = SCHEME.deal(substream(2, 0))
    with pytest.raises(CoincidentPoints):
        SCHEME.recover((0, d.shares[0]), (1, d.shares[0]))


def test_projective_distance_precise_for_close_points():
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([math.cos(1e-10), math.sin(1e-10), 0.0])
    assert projective.projective_distance(a, b) == pytest.approx(1e-10, rel=1e-6)
    assert projective.projective_distance(a, -a) == 0.0


def test_secret_uniform_on_ell():
    secrets, _, _ = SCHEME.sample(substream(3, 0), 10**5)
    arc = SCHEME.arc_parameter(secrets) / math.pi
    assert ks_distance(arc, uniform_cdf) < ks_critical(arc.size, 1e-3)


def test_point_at_distance():
    for d in (math.pi / 18, math.pi / 4, math.pi / 2):
        pt = SCHEME.point_at_distance(PART, d)
        assert SCHEME.participant_lines[PART].contains(pt)
        assert SCHEME.distance_to_ell(pt) == pytest.approx(d, abs=1e-12)
    with pytest.raises(ValueError):
        SCHEME.point_at_distance(0, math.pi / 2)  # line 0 never gets that far from ell


# -- conditional density ------------------------------------------------------------


def binning_oracle(point, edges, grid=200_000):
    """Bin probabilities of the secret given the share, by quadrature over the
    pencil of lines through the share: direction psi has weight |cos psi|,
    the sine of the angle the line makes with the participant line."""
    target = point.array
    n_p = SCHEME.participant_lines[PART].array
    u1 = np.cross(target, n_p)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(target, u1)
    psi = (np.arange(grid) + 0.5) * math.pi / grid
    normals = np.cos(psi)[:, None] * u1 + np.sin(psi)[:, None] * u2
    offsets = SCHEME.offset_from_foot(meet(normals, SCHEME.ell.array[None, :]), point)
    w, _ = np.histogram(offsets, bins=edges, weights=np.abs(np.cos(psi)))
    return w / w.sum()


def chi2_against(counts, probs):
    expected = counts.sum() * probs
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return stat, float(stats.chi2.ppf(0.999, counts.size - 1))


@pytest.mark.parametrize("d", [math.pi / 9, math.pi / 4, math.pi / 2])
def test_binning_density_matches_quadrature(d):
    pt = SCHEME.point_at_distance(PART, d)
    centers, dens, used = SCHEME.conditional_density(PART, pt, substream(4, int(d * 100)), trials=2 * 10**6)
    width = centers[1] - centers[0]
    edges = np.append(centers - width / 2, centers[-1] + width / 2)
    counts = np.rint(dens * used * width)
    stat, q = chi2_against(counts, binning_oracle(pt, edges))
    assert stat < q
    assert dens.min() > 0
    assert np.sum(dens) * width == pytest.approx(1.0)


def test_rotational_closed_form_normalized():
    for d in (0.1, math.pi / 4, 1.3):
        total, _ = integrate.quad(lambda x: projective.rotational_density(x, d), -math.pi / 2, math.pi / 2)
        assert total == pytest.approx(1.0, abs=1e-9)
    x = np.linspace(-1.5, 1.5, 7)
    assert np.allclose(projective.rotational_density(x, math.pi / 2), 1 / math.pi)


@pytest.mark.parametrize("d", [math.pi / 18, math.pi / 4])
def test_rotational_density_matches_closed_form(d):
    pt = SCHEME.point_at_distance(PART, d)
    centers, dens, used = SCHEME.conditional_density(PART, pt, substream(5, 0), trials=10**6, method="rotational")
    width = centers[1] - centers[0]
    probs = np.array([integrate.quad(lambda x: projective.rotational_density(x, d), c - width / 2, c + width / 2)[0]
                      for c in centers])
    stat, q = chi2_against(np.rint(dens * used * width), probs / probs.sum())
    assert stat < q


def test_rotational_shape_claims():
    flat_pt = SCHEME.point_at_distance(PART, math.pi / 2)
    _, dens, _ = SCHEME.conditional_density(PART, flat_pt, substream(6, 0), method="rotational")
    assert dens.max() / dens.min() < 1.1
    pt = SCHEME.point_at_distance(PART, math.pi / 4)
    centers, dens, _ = SCHEME.conditional_density(PART, pt, substream(6, 1), method="rotational")
    assert abs(centers[np.argmax(dens)]) < centers[1] - centers[0]
    assert dens.min() > 0
    assert np.max(np.abs(dens / dens[::-1] - 1)) < 0.10


def test_density_preconditions():
    pt = SCHEME.point_at_distance(PART, 1.0)
    with pytest.raises(ValueError):
        SCHEME.conditional_density(PART, pt, substream(0, 0), bins=10)
    with pytest.raises(ValueError):
        SCHEME.conditional_density(PART, pt, substream(0, 0), trials=1000)
    with pytest.raises(ValueError):
        SCHEME.conditional_density(0, pt, substream(0, 0))  # not on line 0

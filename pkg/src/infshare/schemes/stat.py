"""Schemes where the secret is only ever estimated.

* ``NoisyScheme``: share i = s + xi_i. Finitely many shares leave variance
  1/(m+1); infinitely many pin s down.
* ``ObfuscatedScheme``: share i = s + r_i * eta + xi_i with a common hidden
  eta. Shares whose r_i settle on one value can never cancel eta.
* ``StripScheme``: lattice points of the positive quadrant with r_p = 1 + angle;
  a strip around one ray is unqualified, two strips with different
  directions are qualified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..dealing import Dealing
from ..errors import EmptySubset, Inconclusive
from ..numerics import GaussianVector, NormalParams

R_MIN, R_MAX = 1.0, 10.0


@dataclass(frozen=True)
class NoisyScheme:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 participants")

    def sample(self, rng: np.random.Generator, size: int):
        s = rng.standard_normal(size)
        return s, s[:, None] + rng.standard_normal((size, self.n))

    def deal(self, rng: np.random.Generator) -> Dealing:
        s, h = self.sample(rng, 1)
        return Dealing(float(s[0]), {i: float(v) for i, v in enumerate(h[0])})

    @staticmethod
    def conditional(shares: Sequence[float]) -> NormalParams:
        """Exact law of s given m shares: N(sum / (m + 1), 1 / (m + 1))."""
        h = np.asarray(shares, dtype=float)
        m = h.size
        return NormalParams(float(h.sum()) / (m + 1), 1.0 / (m + 1))

    @staticmethod
    def joint(m: int) -> GaussianVector:
        """Law of (s, s + xi_1, ..., s + xi_m)."""
        cov = np.ones((m + 1, m + 1)) + np.diag([0.0] + [1.0] * m)
        return GaussianVector(np.zeros(m + 1), cov)

    @staticmethod
    def estimate(shares: Sequence[float]) -> float:
        return float(np.mean(shares))


def stat2_variance(r_values: Sequence[float]) -> float:
    """Var(s | shares) for share model s + r_i eta + xi_i with standard normals.

    1/var = 1 + (1 + S) / (rbar^2 + (1 + S) / n), S = sum (r_i - rbar)^2.
    """
    r = np.asarray(r_values, dtype=float)
    if r.size == 0:
        raise EmptySubset("need at least one r value")
    n = r.size
    rbar = float(r.mean())
    dev = float(np.sum((r - rbar) ** 2))
    inv = 1.0 + (1.0 + dev) / (rbar * rbar + (1.0 + dev) / n)
    return 1.0 / inv


def prefix_stat2_variances(r_values: Sequence[float]) -> np.ndarray:
    """stat2_variance of every prefix, in O(n).

    Uses the equivalent precision form 1/var = 1 + n - (sum r)^2 / (1 + sum r^2).
    """
    r = np.asarray(r_values, dtype=float)
    n = np.arange(1, r.size + 1)
    s1 = np.cumsum(r)
    s2 = np.cumsum(r * r)
    return 1.0 / (1.0 + n - s1 * s1 / (1.0 + s2))


@dataclass(frozen=True)
class ObfuscatedScheme:
    r_values: tuple

    def __post_init__(self):
        r = tuple(float(x) for x in self.r_values)
        if not r:
            raise ValueError("need at least one participant")
        if any(not R_MIN <= x < R_MAX for x in r):
            raise ValueError("obfuscating values must lie in [1, 10)")
        object.__setattr__(self, "r_values", r)

    @property
    def n(self) -> int:
        return len(self.r_values)

    def sample(self, rng: np.random.Generator, size: int):
        """Secrets (size,), eta (size,), shares (size, n)."""
        s = rng.standard_normal(size)
        eta = rng.standard_normal(size)
        xi = rng.standard_normal((size, self.n))
        return s, eta, s[:, None] + eta[:, None] * np.asarray(self.r_values) + xi

    def deal(self, rng: np.random.Generator) -> Dealing:
        s, eta, h = self.sample(rng, 1)
        return Dealing(float(s[0]), {i: float(v) for i, v in enumerate(h[0])}, {"eta": float(eta[0])})

    def joint(self, indices: Sequence[int] | None = None) -> GaussianVector:
        """Law of (s, share_i for i in ``indices``)."""
        idx = range(self.n) if indices is None else indices
        r = np.asarray([self.r_values[i] for i in idx])
        m = r.size
        cov = np.empty((m + 1, m + 1))
        cov[0, :] = cov[:, 0] = 1.0
        cov[1:, 1:] = 1.0 + np.outer(r, r) + np.eye(m)
        return GaussianVector(np.zeros(m + 1), cov)

    def conditional(self, shares: Mapping[int, float]) -> NormalParams:
        """Exact law of s given the listed shares, from the 2x2 posterior precision of (s, eta)."""
        if not shares:
            return NormalParams(0.0, 1.0)
        idx = sorted(shares)
        r = np.asarray([self.r_values[i] for i in idx])
        h = np.asarray([shares[i] for i in idx], dtype=float)
        n = r.size
        p11, p12, p22 = 1.0 + n, float(r.sum()), 1.0 + float(r @ r)
        det = p11 * p22 - p12 * p12
        mean = (p22 * float(h.sum()) - p12 * float(r @ h)) / det
        return NormalParams(mean, stat2_variance(r))

    @staticmethod
    def two_group_estimate(a: float, b: float, r: float, t: float) -> float:
        """Secret from group means a (obfuscating values near r) and b (near t)."""
        if r == t:
            raise ValueError("the two groups need different obfuscating values")
        return (t * a - r * b) / (t - r)


# -- lattice strips ---------------------------------------------------------


@dataclass(frozen=True)
class StripVerdict:
    verdict: str  # "qualified" or "unqualified"
    limiting_variance: float
    trace: tuple  # ((prefix_size, variance), ...)


RELATIVE_STABLE = 1e-4
QUALIFIED_FRACTION = 1e-2
GEOMETRIC_DECAY = 0.75


@dataclass(frozen=True)
class StripScheme:
    """Participants are lattice points (x, y), x, y >= 1, within distance R of 0,
    ordered by distance (ties by x)."""

    R: int = 400
    d: float = 6.0
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.R < 2:
            raise ValueError("R must be at least 2")
        if self.d <= 5:
            raise ValueError("strip width d must exceed 5")
        g = np.arange(1, self.R + 1)
        x, y = np.meshgrid(g, g, indexing="ij")
        x, y = x.ravel(), y.ravel()
        keep = x * x + y * y <= self.R * self.R
        x, y = x[keep], y[keep]
        order = np.lexsort((x, x * x + y * y))
        pts = np.stack([x[order], y[order]], axis=1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def angles(self) -> np.ndarray:
        return np.arctan2(self.points[:, 1], self.points[:, 0])

    @property
    def r_values(self) -> np.ndarray:
        return 1.0 + self.angles

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    def deal(self, rng: np.random.Generator) -> Dealing:
        s, eta = rng.standard_normal(2)
        r = self.r_values
        h = s + eta * r + rng.standard_normal(r.size)
        return Dealing(float(s), {i: float(v) for i, v in enumerate(h)}, {"eta": float(eta)})

    def strip_members(self, direction: float, d: float | None = None) -> np.ndarray:
        """Indices (in distance order) of points within d/2 of the ray at ``direction``."""
        d = self.d if d is None else d
        if not 0 < direction < math.pi / 2:
            raise ValueError("direction must lie in (0, pi/2)")
        if d <= 5:
            raise ValueError("strip width d must exceed 5")
        x, y = self.points[:, 0], self.points[:, 1]
        perp = np.abs(x * math.sin(direction) - y * math.cos(direction))
        along = x * math.cos(direction) + y * math.sin(direction)
        return np.flatnonzero((perp <= d / 2) & (along >= 0))

    def annulus_counts(self, members: np.ndarray) -> np.ndarray:
        """Number of members with distance in [j, j+1), for j = 0..R."""
        j = np.floor(self.radii[members]).astype(int)
        return np.bincount(j, minlength=self.R + 1)

    def deviation_sum(self, members: np.ndarray, direction: float) -> float:
        return float(np.sum((self.r_values[members] - (1.0 + direction)) ** 2))

    @staticmethod
    def deviation_bound(d: float) -> float:
        return 100.0 * d**3 * math.pi**2 / 6.0

    def qualification(self, members: Sequence[int]) -> StripVerdict:
        return strip_qualification(self.r_values[np.sort(np.asarray(members, dtype=int))])


def _prefix_sizes(n: int) -> list[int]:
    sizes = []
    k = 1
    while k < n:
        sizes.append(k)
        k *= 2
    sizes.append(n)
    return sizes


def strip_qualification(r_values: Sequence[float]) -> StripVerdict:
    """Three-valued verdict on whether the variance of an infinite family's
    prefixes tends to a positive limit.

    Prefix sizes double (1, 2, 4, ..., then the full count). Because the
    prefix variance approaches its limit like L + c/n, each consecutive pair
    of prefixes is extrapolated to L_j = (n' V' - n V) / (n' - n).

    * unqualified: the last two extrapolated limits are positive and agree
      to 1e-4 relative;
    * qualified: the last extrapolated limit is below 1e-2 of the
      single-point variance and the variance has shrunk by at least a factor
      0.75 per doubling over the last three steps.

    Anything else raises :class:`Inconclusive` carrying the trace.
    """
    r = np.asarray(r_values, dtype=float)
    if r.size == 0:
        raise EmptySubset("need a nonempty subset")
    prefix = prefix_stat2_variances(r)
    sizes = _prefix_sizes(r.size)
    n = np.asarray(sizes, dtype=float)
    v = prefix[np.asarray(sizes) - 1]
    trace = tuple((int(k), float(x)) for k, x in zip(sizes, v))
    if len(sizes) < 5:
        raise Inconclusive(f"only {r.size} points; too few doublings to judge", trace)
    limits = (n[1:] * v[1:] - n[:-1] * v[:-1]) / (n[1:] - n[:-1])
    last, prev = limits[-1], limits[-2]
    if last > 0 and abs(last - prev) <= RELATIVE_STABLE * last:
        return StripVerdict("unqualified", float(last), trace)
    steps = np.log2(n[-4:][1:] / n[-4:][:-1])
    decay = (v[-3:] / v[-4:-1]) ** (1.0 / steps)
    if last < QUALIFIED_FRACTION * v[0] and np.all(decay <= GEOMETRIC_DECAY):
        return StripVerdict("qualified", float(max(last, 0.0)), trace)
    raise Inconclusive(
        f"extrapolated limit {last:.6g} (previous {prev:.6g}), per-doubling decay "
        f"{', '.join(f'{x:.3f}' for x in decay)}: neither criterion met",
        trace,
    )


def union_members(*member_arrays: np.ndarray) -> np.ndarray:
    return np.unique(np.concatenate(member_arrays))

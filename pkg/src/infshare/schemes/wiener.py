"""Wiener-process schemes.

Paths live on M + 1 equally spaced times in [0, 1]. For the integral
schemes the secret is *defined* as the trapezoid integral over that grid,
so a subset observing every grid point recovers it exactly.

Given observations at grid times, the conditional expectation of the path
is the piecewise-linear interpolant through (0, 0) and the observed points,
held constant after the last one. The conditional variance of the secret
is a sum of independent gap terms, for a gap of m cells of width h = 1/M:

* between two observations (bridge):   h^3 (m^3 - m) / 12  ->  g^3 / 12
* after the last observation (free):    h^3 (m^3 / 3 - m / 12)  ->  g^3 / 3
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..dealing import Dealing
from ..errors import BadLabel, EmptySubset

DEFAULT_M = 1 << 14
DEFAULT_DEPTH = 10


@dataclass(frozen=True)
class WienerPath:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values[0] != 0.0:
            raise ValueError("a Wiener path starts at 0")
        self.values.setflags(write=False)

    @property
    def M(self) -> int:
        return self.grid.size - 1

    def at(self, t):
        return np.interp(t, self.grid, self.values)

    def integral(self) -> float:
        return float(trapezoid(self.values[None, :])[0])


def wiener_paths(M: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` paths as a (size, M + 1) array of W at k / M."""
    if M < 2:
        raise ValueError("need M >= 2")
    out = np.empty((size, M + 1))
    out[:, 0] = 0.0
    out[:, 1:] = rng.standard_normal((size, M))
    out[:, 1:] *= np.sqrt(1.0 / M)
    np.cumsum(out[:, 1:], axis=1, out=out[:, 1:])
    return out


def path_functionals(M: int, size: int, rng: np.random.Generator, weights: np.ndarray) -> np.ndarray:
    """``wiener_paths(M, size, rng) @ weights`` without materializing the paths.

    W(k / M) is a prefix sum of the increments, so a grid functional with
    weights w acts on the increments through the suffix sums of w.
    """
    if M < 2:
        raise ValueError("need M >= 2")
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != M + 1:
        raise ValueError("weights must have M + 1 rows")
    suffix = np.cumsum(w[:0:-1], axis=0)[::-1] * np.sqrt(1.0 / M)
    return rng.standard_normal((size, M)) @ suffix


def wiener_sample(M: int, rng: np.random.Generator) -> WienerPath:
    return WienerPath(np.linspace(0.0, 1.0, M + 1), wiener_paths(M, 1, rng)[0])


def trapezoid(values: np.ndarray) -> np.ndarray:
    """Grid trapezoid integral over [0, 1] along the last axis."""
    return values @ trapezoid_weights(values.shape[-1] - 1)


def trapezoid_weights(M: int) -> np.ndarray:
    w = np.full(M + 1, 1.0 / M)
    w[[0, -1]] *= 0.5
    return w


def bridge_gap_variance(cells: int, M: int) -> float:
    h = 1.0 / M
    return h**3 * (cells**3 - cells) / 12.0


def free_gap_variance(cells: int, M: int) -> float:
    h = 1.0 / M
    return h**3 * (cells**3 / 3.0 - cells / 12.0)


@dataclass(frozen=True)
class Recovery:
    estimate: float | np.ndarray
    conditional_variance: float
    max_gap: float
    qualified: bool


def _normalize_obs(indices: Sequence[int], values, M: int):
    idx = np.asarray(indices, dtype=int)
    vals = np.asarray(values, dtype=float)
    if idx.ndim != 1 or vals.shape[-1] != idx.size:
        raise ValueError("values must end in an axis matching the indices")
    if idx.size and (idx.min() < 0 or idx.max() > M):
        raise ValueError("observation index outside the grid")
    order = np.argsort(idx, kind="stable")
    idx = idx[order]
    vals = vals[..., order]
    if np.unique(idx).size != idx.size:
        raise ValueError("duplicate observation index")
    if idx.size == 0 or idx[0] != 0:
        idx = np.concatenate([[0], idx])
        vals = np.concatenate([np.zeros(vals.shape[:-1] + (1,)), vals], axis=-1)
    return idx, vals


def _node_weights(t: np.ndarray) -> np.ndarray:
    """Weights of the observed values in the conditional mean of the integral."""
    widths = np.diff(t)
    w = np.zeros(t.size)
    w[:-1] += 0.5 * widths
    w[1:] += 0.5 * widths
    w[-1] += 1.0 - t[-1]
    return w


def estimate_weights(indices: Sequence[int], M: int) -> np.ndarray:
    """Full-grid weights ``w`` with ``paths @ w`` the conditional mean given ``indices``."""
    idx, _ = _normalize_obs(indices, np.zeros(len(indices)), M)
    w = np.zeros(M + 1)
    w[idx] = _node_weights(idx / M)
    return w


def integral_recover(indices: Sequence[int], values, M: int, epsilon: float | None = None) -> Recovery:
    """Conditional mean and variance of the grid integral given W at grid ``indices``.

    ``values`` may carry leading batch axes (one row per path).
    """
    idx, vals = _normalize_obs(indices, values, M)
    t = idx / M
    widths = np.diff(t)
    est = vals @ _node_weights(t)
    cells = np.diff(idx)
    var = float(sum(bridge_gap_variance(int(c), M) for c in cells if c > 1))
    tail = M - int(idx[-1])
    if tail:
        var += free_gap_variance(tail, M)
    gaps = np.append(widths, 1.0 - t[-1])
    max_gap = float(gaps.max())
    # a gap of a single cell is fully determined on the grid
    effective = max(float(widths[cells > 1].max()) if np.any(cells > 1) else 0.0, 1.0 - t[-1])
    qualified = var == 0.0 if epsilon is None else effective <= epsilon
    return Recovery(est if np.ndim(est) else float(est), var, max_gap, qualified)


@dataclass(frozen=True)
class DenseScheme:
    """Participants are grid indices; participant i holds W(i / M)."""

    M: int = DEFAULT_M
    participants: tuple | None = None  # default: every grid index 1..M
    epsilon_dense: float = 2.0**-10

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("need M >= 2")
        if not 0 < self.epsilon_dense < 1:
            raise ValueError("epsilon_dense must lie in (0, 1)")
        parts = tuple(range(1, self.M + 1)) if self.participants is None else tuple(sorted(set(self.participants)))
        if parts and (parts[0] < 0 or parts[-1] > self.M):
            raise ValueError("participant indices must lie on the grid")
        object.__setattr__(self, "participants", parts)

    @classmethod
    def with_gaps(cls, gaps: Sequence[tuple[float, float]], M: int = DEFAULT_M, **kw) -> DenseScheme:
        """Every grid time except those strictly inside one of ``gaps``.

        A gap ending at 1 also drops t = 1, leaving a free end.
        """
        t = np.arange(1, M + 1) / M
        keep = np.ones(M, dtype=bool)
        for a, b in gaps:
            keep &= ~((t > a) & ((t < b) | (b >= 1.0)))
        return cls(M, tuple(int(i) for i in np.flatnonzero(keep) + 1), **kw)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.participants) / self.M

    def deal(self, rng: np.random.Generator) -> Dealing:
        path = wiener_paths(self.M, 1, rng)[0]
        shares = {int(i): float(path[i]) for i in self.participants}
        return Dealing(float(trapezoid(path)), shares, {"M": self.M})

    def recover(self, observations: Mapping[int, float]) -> Recovery:
        idx = sorted(observations)
        unknown = set(idx) - set(self.participants)
        if unknown:
            raise ValueError(f"not participants: {sorted(unknown)[:5]}")
        return integral_recover(idx, [observations[i] for i in idx], self.M, self.epsilon_dense)


def parse_gaps(text: str) -> list[tuple[float, float]]:
    """``"0.2:0.3,0.6:0.65"`` -> [(0.2, 0.3), (0.6, 0.65)]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        a, sep, b = part.partition(":")
        if not sep:
            raise ValueError(f"gap {part!r} is not of the form a:b")
        lo, hi = float(a), float(b)
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError(f"gap {part!r} must satisfy 0 <= a < b <= 1")
        out.append((lo, hi))
    return out


def tree_map(label: Sequence[int]) -> float:
    """Time of a binary-tree node: 1/2 + (1/2) * sum eps_i / 2^i."""
    t = 0.5
    for i, e in enumerate(label, start=1):
        if e not in (-1, 1):
            raise BadLabel(f"label entries must be -1 or +1, got {e!r}")
        t += 0.5 * e / 2**i
    return t


def subtree_interval(label: Sequence[int]) -> tuple[float, float]:
    """Open interval of times covered by the subtree rooted at ``label``."""
    half = 0.5 ** (len(label) + 1)
    t = tree_map(label)
    return t - half, t + half


def tree_labels(depth: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = [()]
    level = [()]
    for _ in range(depth):
        level = [lab + (e,) for lab in level for e in (-1, 1)]
        out.extend(level)
    return out


@dataclass(frozen=True)
class TreeScheme:
    """Nodes of the binary tree down to ``depth``, participant index = position in :attr:`labels`."""

    depth: int = DEFAULT_DEPTH
    M: int = DEFAULT_M
    labels: list = field(init=False, repr=False, compare=False)
    grid_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.M % (1 << (self.depth + 1)):
            raise ValueError("M must be a multiple of 2^(depth+1) so node times fall on the grid")
        labels = tree_labels(self.depth)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "grid_index", {lab: int(round(tree_map(lab) * self.M)) for lab in labels})

    def deal(self, rng: np.random.Generator) -> Dealing:
        path = wiener_paths(self.M, 1, rng)[0]
        shares = {i: float(path[self.grid_index[lab]]) for i, lab in enumerate(self.labels)}
        return Dealing(float(trapezoid(path)), shares, {"M": self.M})

    def misses_subtree(self, subset: Sequence[int]) -> bool:
        """True if some node's whole (truncated) subtree is absent from ``subset``.

        Within the truncation this happens exactly when a leaf is missing.
        """
        present = {self.labels[i] for i in subset}
        return any(lab not in present for lab in self.labels if len(lab) == self.depth)

    def recover(self, observations: Mapping[int, float]) -> Recovery:
        """Estimate from node observations keyed by participant index.

        Qualification follows the tree rule (no missed subtree); the
        returned variance still accounts for the unobserved stretches near
        0 and 1 that no finite tree covers.
        """
        idx = [self.grid_index[self.labels[i]] for i in observations]
        rec = integral_recover(idx, [observations[i] for i in observations], self.M)
        return Recovery(rec.estimate, rec.conditional_variance, rec.max_gap,
                        not self.misses_subtree(list(observations)))


@dataclass(frozen=True)
class LimitScheme:
    """Participants at times in [0, 1); the secret is W(1)."""

    times: tuple

    def __post_init__(self):
        times = tuple(sorted(float(t) for t in self.times))
        if not times:
            raise ValueError("need at least one participant time")
        if times[0] < 0 or times[-1] >= 1:
            raise ValueError("participant times must lie in [0, 1)")
        if len(set(times)) != len(times):
            raise ValueError("participant times must be distinct")
        object.__setattr__(self, "times", times)

    @classmethod
    def harmonic(cls, n: int) -> LimitScheme:
        """Times 1 - 1/i for i = 1..n."""
        return cls(tuple(1.0 - 1.0 / i for i in range(1, n + 1)))

    def sample(self, rng: np.random.Generator, size: int):
        """Exact values at the participant times and at 1 (no grid)."""
        t = np.asarray(self.times + (1.0,))
        dt = np.diff(np.concatenate([[0.0], t]))
        w = np.cumsum(rng.standard_normal((size, t.size)) * np.sqrt(dt), axis=1)
        return w[:, -1], w[:, :-1]

    def deal(self, rng: np.random.Generator) -> Dealing:
        secret, shares = self.sample(rng, 1)
        return Dealing(float(secret[0]), {i: float(v) for i, v in enumerate(shares[0])})

    def recover(self, observations: Mapping[int, float]) -> Recovery:
        """W at the latest observed time, with residual variance 1 - t*."""
        if not observations:
            raise EmptySubset("need at least one observation")
        last = max(observations, key=lambda i: self.times[i])
        t_star = self.times[last]
        return Recovery(float(observations[last]), 1.0 - t_star, 1.0 - t_star, False)

"""Gaussian polynomial schemes.

The dealer draws the values of a degree < k polynomial at the anchor nodes
1/k, 2/k, ..., 1 independently from N(0, sigma^2). The secret is f(0) (or
f(0) mod 1), participant p gets f(p). Everything is computed from the
anchors through Lagrange weights; coefficients are never formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..dealing import Dealing
from ..errors import NotFractional, WrongShareCount
from ..numerics import (
    GaussianVector,
    NormalParams,
    gaussian_condition,
    lagrange_weights,
    mod1,
    wrapped_normal_density,
    wrapped_normal_min,
)

DENSITY_GRID = 1000


def secret_variance_factor(k: int) -> int:
    """Var f(0) / sigma^2 for standard anchors: C(2k, k) - 1."""
    return math.comb(2 * k, k) - 1


@dataclass(frozen=True)
class GaussConditional:
    """Law of the secret given k-1 shares, in the a_l, b_l parametrisation.

    For each anchor l, f(l/k) = s * a[l] - b[l] once the shares are fixed, so
    the conditional density is proportional to exp(-(A s - B)^2 / (2 sigma^2)).
    """

    a: np.ndarray
    b: np.ndarray
    A_sq: float
    AB: float
    law: NormalParams


@dataclass(frozen=True)
class GaussThresholdScheme:
    k: int
    labels: tuple
    sigma: float = 1.0
    fractional_secret: bool = False

    def __post_init__(self):
        labels = tuple(float(p) for p in self.labels)
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if any(p == 0.0 for p in labels):
            raise ValueError("labels must be nonzero")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        if self.fractional_secret and any(p <= 1.0 for p in labels):
            raise ValueError("fractional-secret variant needs every label > 1")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def ajtai_dwork(cls, k: int, lam: float, labels: Sequence[float]) -> GaussThresholdScheme:
        """Fractional-secret variant with anchor spread sigma = lam * sqrt(k)."""
        if lam <= 0:
            raise ValueError("lambda must be positive")
        return cls(k, tuple(labels), sigma=lam * math.sqrt(k), fractional_secret=True)

    @property
    def anchors(self) -> np.ndarray:
        return np.arange(1, self.k + 1) / self.k

    @property
    def secret_variance(self) -> float:
        """Variance of f(0) (before any mod 1)."""
        return self.sigma**2 * secret_variance_factor(self.k)

    def weights(self, points) -> np.ndarray:
        return lagrange_weights(self.anchors, points)

    def sample(self, rng: np.random.Generator, size: int):
        """Secrets (size,) and shares (size, len(labels)) for ``size`` dealings."""
        vals = self.sigma * rng.standard_normal((size, self.k))
        f0 = vals @ self.weights(0.0)
        shares = vals @ self.weights(np.asarray(self.labels)).T if self.labels else np.empty((size, 0))
        return (mod1(f0) if self.fractional_secret else f0), shares

    def deal(self, rng: np.random.Generator) -> Dealing:
        secret, shares = self.sample(rng, 1)
        return Dealing(float(np.ravel(secret)[0]), {i: float(v) for i, v in enumerate(shares[0])})

    def recover(self, pairs: Sequence[tuple[float, float]]) -> float:
        """Secret from exactly k (label, share) pairs."""
        if len(pairs) != self.k:
            raise WrongShareCount(f"need exactly {self.k} shares, got {len(pairs)}")
        xs, ys = zip(*pairs)
        f0 = float(lagrange_weights(xs, 0.0) @ np.asarray(ys, dtype=float))
        return float(mod1(f0)) if self.fractional_secret else f0

    def conditional(self, pairs: Sequence[tuple[float, float]]) -> GaussConditional:
        """Closed-form law of f(0) given k-1 (label, share) pairs.

        Interpolating through the node 0 and the k-1 labels expresses each
        anchor value as s * a_l - b_l; a_l is the Lagrange weight of node 0.
        """
        if len(pairs) != self.k - 1:
            raise WrongShareCount(f"need exactly {self.k - 1} shares, got {len(pairs)}")
        xs = [float(p) for p, _ in pairs]
        hs = np.asarray([float(h) for _, h in pairs])
        if any(x == 0.0 for x in xs):
            raise ValueError("labels must be nonzero")
        w = lagrange_weights([0.0, *xs], self.anchors)  # (k, k): rows are anchors
        a = w[:, 0]
        b = -(w[:, 1:] @ hs)
        a_sq = float(a @ a)
        ab = float(a @ b)
        law = NormalParams(ab / a_sq, self.sigma**2 / a_sq)
        return GaussConditional(a, b, a_sq, ab, law)

    def joint(self, labels: Sequence[float]) -> GaussianVector:
        """Joint law of (f(0), f(labels...))."""
        rows = self.weights(np.asarray([0.0, *labels], dtype=float))
        return GaussianVector(np.zeros(len(rows)), self.sigma**2 * rows @ rows.T)

    def conditional_variance(self, labels: Sequence[float]) -> float:
        """Var f(0) given shares at ``labels`` (any count below k), by Schur complement."""
        labels = list(labels)
        if len(labels) >= self.k:
            return 0.0
        joint = self.joint(labels)
        idx = list(range(1, len(labels) + 1))
        return gaussian_condition(joint, idx, [0.0] * len(idx), 0).variance


@dataclass(frozen=True)
class SecrecyGap:
    gap: float
    bound: float
    conditional_variance: float
    unconditional_variance: float

    @property
    def holds(self) -> bool:
        return self.gap < self.bound


def ajtai_bound(lam: float) -> float:
    return 4.0 * math.exp(-2.0 * math.pi**2 * lam * lam)


def sup_shifted_gap(sigma_a: float, sigma_b: float, grid: int = DENSITY_GRID) -> float:
    """max over x and over a shift mu (both on the grid) of
    |wrapped(x - mu; sigma_a) - wrapped(x; sigma_b)|."""
    x = np.arange(grid) / grid
    ga = wrapped_normal_density(x, sigma_a)
    gb = wrapped_normal_density(x, sigma_b)
    return float(max(np.max(np.abs(np.roll(ga, j) - gb)) for j in range(grid)))


def ajtai_secrecy_gap(
    scheme: GaussThresholdScheme,
    lam: float,
    labels: Sequence[float] | None = None,
    grid: int = DENSITY_GRID,
) -> SecrecyGap:
    """Largest pointwise difference between the secret's conditional
    (given k-1 shares) and unconditional densities on [0, 1).

    The conditional mean depends on the share values, so the supremum is
    also taken over every shift of the conditional density on the grid.
    """
    if not scheme.fractional_secret:
        raise NotFractional("secrecy gap is defined for the fractional-secret variant")
    labels = list(scheme.labels[: scheme.k - 1] if labels is None else labels)
    cond = scheme.conditional([(p, 0.0) for p in labels]).law.variance
    uncond = scheme.secret_variance
    gap = sup_shifted_gap(math.sqrt(cond), math.sqrt(uncond), grid)
    return SecrecyGap(gap, ajtai_bound(lam), cond, uncond)


@dataclass(frozen=True)
class RandomDegreeScheme:
    """Degree drawn with P(k) proportional to 2^(1-k), k = 2..max_k, then the
    fractional-secret scheme runs with that k."""

    lam: float
    labels: tuple
    max_k: int = 12
    probabilities: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.max_k < 2:
            raise ValueError("max_k must be at least 2")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        labels = tuple(float(p) for p in self.labels)
        if any(p <= 1.0 for p in labels):
            raise ValueError("labels must exceed 1")
        object.__setattr__(self, "labels", labels)
        ks = np.arange(2, self.max_k + 1)
        p = 0.5 ** (ks - 1)
        object.__setattr__(self, "probabilities", p / p.sum())

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(2, self.max_k + 1)

    @property
    def renormalization(self) -> float:
        """Factor (1 - 2^(1-max_k))^-1 applied to the untruncated probabilities."""
        return 1.0 / (1.0 - 0.5 ** (self.max_k - 1))

    def branch(self, k: int) -> GaussThresholdScheme:
        return GaussThresholdScheme.ajtai_dwork(k, self.lam, self.labels)

    def sample(self, rng: np.random.Generator, size: int):
        """Secrets, shares and realized degrees for ``size`` dealings."""
        ks = rng.choice(self.degrees, size=size, p=self.probabilities)
        secrets = np.empty(size)
        shares = np.empty((size, len(self.labels)))
        for k in np.unique(ks):
            idx = np.flatnonzero(ks == k)
            s, h = self.branch(int(k)).sample(rng, idx.size)
            secrets[idx] = s
            shares[idx] = h
        return secrets, shares, ks

    def deal(self, rng: np.random.Generator) -> Dealing:
        secrets, shares, ks = self.sample(rng, 1)
        return Dealing(float(secrets[0]), {i: float(v) for i, v in enumerate(shares[0])}, {"k": int(ks[0])})

    def branch_floor(self, k: int, labels: Sequence[float]) -> float:
        """Minimum over [0, 1) of the conditional secret density in branch k
        given shares at ``labels`` (fewer than k of them)."""
        var = self.branch(k).conditional_variance(labels)
        return wrapped_normal_min(math.sqrt(var))

    def density_floor(self, labels: Sequence[float]) -> float:
        """Lower bound on the secret's conditional density given shares at ``labels``.

        Only branches whose degree exceeds the number of shares keep a
        density; each contributes its prior weight times its minimum.
        """
        m = len(labels)
        return float(
            sum(p * self.branch_floor(int(k), labels) for k, p in zip(self.degrees, self.probabilities) if k > m)
        )


@dataclass(frozen=True)
class ConstantApart:
    c: float
    min_ratio: float
    max_ratio: float


@dataclass(frozen=True)
class L2Scheme:
    """Independent N(0, sigma_i^2) shares; the secret is their sum."""

    sigmas: tuple
    fractional_secret: bool = False
    tail: float | None = None  # sum of sigma_i^2 beyond the truncation, when known

    def __post_init__(self):
        sig = tuple(float(s) for s in self.sigmas)
        if not sig or any(s <= 0 for s in sig):
            raise ValueError("sigmas must be positive")
        object.__setattr__(self, "sigmas", sig)

    @classmethod
    def geometric(cls, n: int, ratio: float = 0.5, fractional_secret: bool = False) -> L2Scheme:
        sig = tuple(ratio**i for i in range(1, n + 1))
        tail = ratio ** (2 * (n + 1)) / (1 - ratio * ratio)
        return cls(sig, fractional_secret, tail)

    @property
    def n(self) -> int:
        return len(self.sigmas)

    @property
    def total_variance(self) -> float:
        return float(np.sum(np.square(self.sigmas)))

    def sample(self, rng: np.random.Generator, size: int):
        h = rng.standard_normal((size, self.n)) * np.asarray(self.sigmas)
        s = h.sum(axis=1)
        return (mod1(s) if self.fractional_secret else s), h

    def deal(self, rng: np.random.Generator) -> Dealing:
        s, h = self.sample(rng, 1)
        return Dealing(float(np.ravel(s)[0]), {i + 1: float(v) for i, v in enumerate(h[0])},
                       {"tail": self.tail})

    def recover(self, all_shares: Sequence[float]) -> float:
        if len(all_shares) != self.n:
            raise WrongShareCount(f"need all {self.n} shares, got {len(all_shares)}")
        s = float(np.sum(np.asarray(all_shares, dtype=float)))
        return float(mod1(s)) if self.fractional_secret else s

    def residual_law(self, shares: dict[int, float], excluded: int) -> NormalParams:
        """Law of the (unreduced) secret given every share except ``excluded`` (1-based)."""
        m = sum(float(v) for i, v in shares.items() if i != excluded)
        return NormalParams(m, self.sigmas[excluded - 1] ** 2)

    def fractional_gap(self, excluded: int, grid: int = DENSITY_GRID) -> ConstantApart:
        """Constant c with c <= conditional/unconditional <= 1/c for the reduced secret.

        Ratios are taken on a grid of x and of conditional means. Very small
        excluded sigmas make the conditional minimum underflow, giving c = 0.
        """
        x = np.arange(grid) / grid
        gc = wrapped_normal_density(x, self.sigmas[excluded - 1])
        gu = wrapped_normal_density(x, math.sqrt(self.total_variance))
        lo, hi = math.inf, 0.0
        for j in range(grid):
            r = np.roll(gc, j) / gu
            lo = min(lo, float(r.min()))
            hi = max(hi, float(r.max()))
        return ConstantApart(min(lo, 1.0 / hi), lo, hi)

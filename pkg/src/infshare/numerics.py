"""Numeric kernels shared by the schemes.

Mod-1 arithmetic, Lagrange interpolation in product form, the wrapped
normal density (two independent series), exact Gaussian conditioning by
Schur complement, and the screening statistics used by the verifiers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import DuplicateNode, NonFinite, SingularObservedBlock, TooFewSamples

SERIES_SWITCH = 0.7
# exp(-40) ~ 4e-18: every omitted series term is below this times a small prefactor
_TAIL_EXPONENT = 40.0
CHOLESKY_JITTER = 1e-12


@dataclass(frozen=True)
class NormalParams:
    mean: float
    variance: float
    condition_number: float | None = None

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be non-negative")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class GaussianVector:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match mean")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=1e-12):
            raise ValueError("covariance must be symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-10:
            raise ValueError("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


# -- mod 1 -------------------------------------------------------------------

def mod1(x):
    """Fractional part ``x - floor(x)``, always in [0, 1).

    Works on scalars and arrays. For |x| up to 2**40 the result is exact
    to the float spacing of ``x`` (about 2e-4 at 2**40), which is the best
    any representation of ``x`` allows.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite("mod1 of a non-finite value")
    r = arr - np.floor(arr)
    # x slightly below an integer can round up to exactly 1.0
    r = np.where(r >= 1.0, 0.0, r)
    return float(r) if r.ndim == 0 else r


def circular_distance(a, b):
    """Distance between points of the unit circle R/Z."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    return float(d) if d.ndim == 0 else d


# -- Lagrange interpolation ----------------------------------------------------

def lagrange_weights(nodes: Sequence[float], at) -> np.ndarray:
    """Weights L_i(at) of the Lagrange basis on ``nodes``.

    ``at`` may be a scalar (returns shape (n,)) or a 1-d array (returns
    shape (len(at), n)). The value of the interpolant is ``weights @ y``.
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("need at least one node")
    if np.unique(x).size != x.size:
        raise DuplicateNode("interpolation nodes must be distinct")
    t = np.atleast_1d(np.asarray(at, dtype=float))
    n = x.size
    w = np.ones((t.size, n))
    for i in range(n):
        for j in range(n):
            if j != i:
                w[:, i] *= (t - x[j]) / (x[i] - x[j])
    return w[0] if np.ndim(at) == 0 else w


def lagrange_eval(points: Sequence[tuple[float, float]], at: float) -> float:
    """Value at ``at`` of the polynomial of degree < n through ``points``."""
    if len(points) == 0:
        raise ValueError("need at least one point")
    xs, ys = zip(*points)
    return float(lagrange_weights(xs, at) @ np.asarray(ys, dtype=float))


# -- wrapped normal ------------------------------------------------------------

def _reduce(x, mean):
    return np.asarray(x, dtype=float) - mean - np.floor(np.asarray(x, dtype=float) - mean)


def wrapped_normal_lattice(x, sigma: float, mean: float = 0.0):
    """Density of N(mean, sigma^2) mod 1 as a sum over integer shifts."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    u = _reduce(x, mean)
    kmax = int(math.ceil(sigma * math.sqrt(2 * _TAIL_EXPONENT))) + 1
    ks = np.arange(-kmax, kmax + 2)
    terms = np.exp(-((u[..., None] - ks) ** 2) / (2 * sigma * sigma))
    out = terms.sum(axis=-1) / math.sqrt(2 * math.pi * sigma * sigma)
    return float(out) if out.ndim == 0 else out


def wrapped_normal_theta(x, sigma: float, mean: float = 0.0):
    """Same density as a cosine (theta) series."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    u = _reduce(x, mean)
    lmax = int(math.ceil(math.sqrt(_TAIL_EXPONENT / (2 * math.pi**2 * sigma * sigma)))) + 1
    ls = np.arange(1, lmax + 1)
    coef = np.exp(-2 * math.pi**2 * sigma * sigma * ls * ls)
    out = 1.0 + 2.0 * (np.cos(2 * math.pi * u[..., None] * ls) * coef).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def wrapped_normal_density(x, sigma: float, mean: float = 0.0):
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if sigma <= SERIES_SWITCH:
        return wrapped_normal_lattice(x, sigma, mean)
    return wrapped_normal_theta(x, sigma, mean)


def wrapped_normal_min(sigma: float) -> float:
    """Smallest value of the wrapped density (attained half a period from the mean)."""
    return wrapped_normal_density(0.5, sigma)


def wrapped_normal_max(sigma: float) -> float:
    return wrapped_normal_density(0.0, sigma)


def wrapped_normal_cdf(x, sigma: float, mean: float = 0.0):
    """CDF on [0, 1) of N(mean, sigma^2) mod 1, by the integrated theta series."""
    u = np.asarray(x, dtype=float)
    lmax = int(math.ceil(math.sqrt(_TAIL_EXPONENT / (2 * math.pi**2 * sigma * sigma)))) + 1
    ls = np.arange(1, lmax + 1)
    coef = np.exp(-2 * math.pi**2 * sigma * sigma * ls * ls) / (math.pi * ls)
    phase = 2 * math.pi * ls
    s = (np.sin(phase * (u[..., None] - mean)) - np.sin(phase * (0.0 - mean))) * coef
    out = u + s.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


# -- Gaussian conditioning -----------------------------------------------------

def _cholesky(block: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factor and condition number of ``block`` (jittered if needed).

    A block whose condition number exceeds 1 / jitter is treated as
    singular: the jitter would then be deciding the answer.
    """
    try:
        chol = np.linalg.cholesky(block)
    except np.linalg.LinAlgError:
        block = block + CHOLESKY_JITTER * np.eye(block.shape[0])
        try:
            chol = np.linalg.cholesky(block)
        except np.linalg.LinAlgError as exc:
            raise SingularObservedBlock("observed covariance block is singular") from exc
    cond = float(np.linalg.cond(block))
    if not cond <= 1.0 / CHOLESKY_JITTER:
        raise SingularObservedBlock(f"observed covariance block is singular (condition number {cond:.3g})")
    return chol, cond


def gaussian_condition(
    joint: GaussianVector,
    observed_indices: Sequence[int],
    observed_values: Sequence[float],
    target_index: int,
) -> NormalParams:
    """Exact conditional law of one coordinate given others (Schur complement)."""
    obs = np.asarray(observed_indices, dtype=int)
    h = np.asarray(observed_values, dtype=float)
    if obs.size != h.size:
        raise ValueError("observed indices and values differ in length")
    mu, cov = joint.mean, joint.covariance
    if obs.size == 0:
        return NormalParams(float(mu[target_index]), float(cov[target_index, target_index]))
    # equilibrate to unit diagonal first; the rescaling is exact and keeps
    # observations of very different magnitude from spoiling the solve
    scale = np.sqrt(np.diag(cov)[obs])
    if np.any(scale == 0):
        raise SingularObservedBlock("an observed coordinate has zero variance")
    s_oo = cov[np.ix_(obs, obs)] / np.outer(scale, scale)
    s_to = cov[target_index, obs] / scale
    chol, cond = _cholesky(s_oo)
    # Sigma_oo^{-1} v via two triangular solves
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, (h - mu[obs]) / scale))
    beta = np.linalg.solve(chol, s_to)
    mean = mu[target_index] + s_to @ alpha
    var = cov[target_index, target_index] - beta @ beta
    return NormalParams(float(mean), max(float(var), 0.0), cond)


# -- statistics ----------------------------------------------------------------

def ks_distance(samples, cdf: Callable) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 100:
        raise TooFewSamples("KS distance needs at least 100 samples")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def ks_critical(n: int, alpha: float = 0.05) -> float:
    """Asymptotic one-sample KS critical value c(alpha)/sqrt(n)."""
    return float(stats.kstwobign.isf(alpha)) / math.sqrt(n)


def sample_stats(samples, chunk: int = 1 << 16) -> tuple[float, float]:
    """Mean and unbiased variance in one pass (chunked Chan/Welford merge)."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise TooFewSamples("need at least two samples")
    n = 0
    mean = 0.0
    m2 = 0.0
    for start in range(0, x.size, chunk):
        block = x[start : start + chunk]
        nb = block.size
        mb = float(block.mean())
        m2b = float(((block - mb) ** 2).sum())
        delta = mb - mean
        tot = n + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return mean, m2 / (n - 1)


def correlation(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a - a.mean()
    b = b - b.mean()
    return float((a @ b) / math.sqrt((a @ a) * (b @ b)))


def chi2_independence(a, b, bins: int = 10, lo: float = 0.0, hi: float = 1.0) -> tuple[float, float]:
    """Pearson chi-square statistic of a bins x bins contingency table.

    Returns ``(statistic, 0.999 quantile)`` for (bins-1)^2 degrees of freedom.
    Values outside [lo, hi) are clipped into the edge bins.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ia = np.clip(((a - lo) / (hi - lo) * bins).astype(int), 0, bins - 1)
    ib = np.clip(((b - lo) / (hi - lo) * bins).astype(int), 0, bins - 1)
    table = np.zeros((bins, bins))
    np.add.at(table, (ia, ib), 1.0)
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    mask = expected > 0
    stat = float((((table - expected) ** 2)[mask] / expected[mask]).sum())
    dof = (bins - 1) ** 2
    return stat, float(stats.chi2.ppf(0.999, dof))

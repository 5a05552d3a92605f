"""Scheme builders and the deal/recover adapters used by the CLI.

Every registered name builds an immutable scheme from an
:class:`ExperimentConfig`. Parameter problems surface as
:class:`BadParameter` naming the violated invariant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Collection, Mapping

import numpy as np

from .. import hilbert
from ..access import from_base
from ..dealing import Dealing
from ..errors import BadParameter, NotQualified, SharingError, UnknownScheme
from ..numerics import circular_distance
from ..schemes import gauss, projective, stat, uniform, wiener
from .config import ExperimentConfig


@dataclass(frozen=True)
class Recovered:
    """Result of recovering one trial: an exact value (variance 0) or an estimate."""

    estimate: float
    conditional_variance: float = 0.0


def _guard(fn: Callable[[], Any]) -> Any:
    try:
        return fn()
    except BadParameter:
        raise
    except (SharingError, ValueError) as exc:
        raise BadParameter(str(exc)) from None


# -- builders ------------------------------------------------------------------

DEFAULT_SLOPE_LABELS = (0.2, 0.45, 0.7, 0.9)
DEFAULT_GAUSS_LABELS = (0.5, 1.5, 2.5, 3.5, 4.5)
DEFAULT_FRACTIONAL_LABELS = (1.5, 2.5, 3.5, 4.5, 5.5)
DEFAULT_R_VALUES = (1.0, 1.5, 2.0, 3.0, 5.0, 8.0)


def parse_base(text: str) -> list[list[int]]:
    """``"0,1;1,2"`` -> [[0, 1], [1, 2]]."""
    try:
        return [[int(t) for t in block.split(",")] for block in text.split(";") if block.strip()]
    except ValueError:
        raise BadParameter(f"base must look like '0,1;1,2', got {text!r}") from None


def build_composite(cfg: ExperimentConfig) -> uniform.CompositeScheme:
    n = cfg.get_int("n", 3)
    base = parse_base(cfg.get_str("base", "0,1;1,2"))
    return _guard(lambda: uniform.CompositeScheme(from_base(range(n), base)))


def build_projective(cfg: ExperimentConfig) -> projective.ProjectiveScheme:
    return _guard(lambda: projective.ProjectiveScheme.standard(cfg.get_int("n", 5)))


def build_gauss(cfg: ExperimentConfig) -> gauss.GaussThresholdScheme:
    k = cfg.get_int("k", 3)
    labels = cfg.get_floats("labels", DEFAULT_GAUSS_LABELS)
    return _guard(lambda: gauss.GaussThresholdScheme(k, labels, sigma=cfg.get_float("sigma", 1.0)))


def build_ajtai(cfg: ExperimentConfig) -> gauss.GaussThresholdScheme:
    k = cfg.get_int("k", 2)
    lam = cfg.get_float("lam", 0.5)
    labels = cfg.get_floats("labels", DEFAULT_FRACTIONAL_LABELS)
    return _guard(lambda: gauss.GaussThresholdScheme.ajtai_dwork(k, lam, labels))


def build_random_degree(cfg: ExperimentConfig) -> gauss.RandomDegreeScheme:
    return _guard(lambda: gauss.RandomDegreeScheme(
        cfg.get_float("lam", 0.5), cfg.get_floats("labels", DEFAULT_FRACTIONAL_LABELS), cfg.get_int("max_k", 12)))


def build_l2(cfg: ExperimentConfig) -> gauss.L2Scheme:
    if cfg.has("sigmas"):
        return _guard(lambda: gauss.L2Scheme(cfg.get_floats("sigmas", ())))
    return _guard(lambda: gauss.L2Scheme.geometric(cfg.get_int("n", 20), cfg.get_float("ratio", 0.5)))


def build_dense(cfg: ExperimentConfig) -> wiener.DenseScheme:
    M = cfg.get_int("M", wiener.DEFAULT_M)
    eps = cfg.get_float("epsilon", 2.0**-10)
    gaps = _guard(lambda: wiener.parse_gaps(cfg.get_str("gaps", "")))
    return _guard(lambda: wiener.DenseScheme.with_gaps(gaps, M, epsilon_dense=eps))


def build_tree(cfg: ExperimentConfig) -> wiener.TreeScheme:
    return _guard(lambda: wiener.TreeScheme(cfg.get_int("depth", wiener.DEFAULT_DEPTH), cfg.get_int("M", wiener.DEFAULT_M)))


def build_limit(cfg: ExperimentConfig) -> wiener.LimitScheme:
    if cfg.has("times"):
        return _guard(lambda: wiener.LimitScheme(cfg.get_floats("times", ())))
    n = cfg.get_int("n", 1024)
    if n < 1:
        raise BadParameter(f"n must be >= 1, got {n}")
    return wiener.LimitScheme.harmonic(n)


def build_obfuscated(cfg: ExperimentConfig) -> stat.ObfuscatedScheme:
    return _guard(lambda: stat.ObfuscatedScheme(cfg.get_floats("r_values", DEFAULT_R_VALUES)))


def build_strip(cfg: ExperimentConfig) -> stat.StripScheme:
    return _guard(lambda: stat.StripScheme(cfg.get_int("R", 400), cfg.get_float("d", 6.0)))


def default_hilbert_program() -> hilbert.HilbertProgram:
    """Degree-2 Gaussian threshold program with three participants."""
    return hilbert.from_gauss_threshold(gauss.GaussThresholdScheme(3, (0.5, 1.5, 2.5)))


def build_hilbert(cfg: ExperimentConfig) -> hilbert.HilbertProgram:
    path = cfg.get_str("program", None)
    if path is None:
        return default_hilbert_program()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadParameter(f"cannot read program file: {exc}") from None
    return _guard(lambda: hilbert.loads(text))


def _positive(name: str, value: int, low: int = 2) -> int:
    if value < low:
        raise BadParameter(f"{name} must be >= {low}, got {value}")
    return value


BUILDERS: dict[str, Callable[[ExperimentConfig], Any]] = {
    "modsum": lambda c: uniform.ModSumScheme(_positive("n", c.get_int("n", 3))),
    "composite": build_composite,
    "slope": lambda c: _guard(lambda: uniform.SlopeScheme(c.get_floats("labels", DEFAULT_SLOPE_LABELS))),
    "dyadic-ramp": lambda c: uniform.DyadicRampScheme(_positive("n", c.get_int("n", 20))),
    "projective": build_projective,
    "gauss-threshold": build_gauss,
    "ajtai-dwork": build_ajtai,
    "random-degree": build_random_degree,
    "l2": build_l2,
    "wiener-dense": build_dense,
    "wiener-tree": build_tree,
    "wiener-limit": build_limit,
    "noisy": lambda c: stat.NoisyScheme(_positive("n", c.get_int("n", 10))),
    "obfuscated": build_obfuscated,
    "strip": build_strip,
    "hilbert": build_hilbert,
}

# suites without a dealing scheme
SUITE_ONLY = ("access", "kernels")


def scheme_names() -> list[str]:
    return sorted([*BUILDERS, *SUITE_ONLY])


def build(cfg: ExperimentConfig):
    if cfg.scheme in SUITE_ONLY:
        raise BadParameter(f"{cfg.scheme!r} is a verification suite, not a scheme")
    try:
        builder = BUILDERS[cfg.scheme]
    except KeyError:
        raise UnknownScheme(f"unknown scheme {cfg.scheme!r}; known: {', '.join(scheme_names())}") from None
    return builder(cfg)


# -- recovery adapters ---------------------------------------------------------

Shares = Mapping[int, tuple]


def _scalars(shares: Shares, participants) -> list[float]:
    return [float(shares[p][0]) for p in participants]


def _need_all(shares: Shares, expected: range, rule: str):
    missing = sorted(set(expected) - set(shares))
    if missing:
        raise NotQualified(f"{rule}: participants {missing} are missing")


def recover_trial(name: str, scheme, shares: Shares) -> Recovered:
    """Recover (or estimate) the secret of one trial from the given shares.

    Raises :class:`NotQualified` naming the rule when the subset cannot
    recover, and :class:`BadParameter` when the shares do not fit the scheme
    (unknown participants, wrong share shape). Schemes whose finite subsets
    are never qualified (noisy, obfuscated, strip, wiener-limit) return the
    conditional mean and variance.
    """
    try:
        return _recover_trial(name, scheme, shares)
    except NotQualified:
        raise
    except (KeyError, IndexError, ValueError) as exc:
        raise BadParameter(f"shares do not fit scheme {name!r}: {exc}") from None


def participant_ids(name: str, scheme) -> Collection[int]:
    """Participant indices a share CSV may carry for this scheme."""
    if name in ("dyadic-ramp", "l2"):
        return range(1, scheme.n + 1)
    if name in ("modsum", "noisy", "obfuscated"):
        return range(scheme.n)
    if name == "composite":
        return range(len(scheme.structure.participants))
    if name == "projective":
        return range(len(scheme.participant_lines))
    if name == "wiener-limit":
        return range(len(scheme.times))
    if name == "strip":
        return range(len(scheme.points))
    if name in ("wiener-dense", "hilbert"):
        return set(scheme.participants)
    return range(len(scheme.labels))


def _recover_trial(name: str, scheme, shares: Shares) -> Recovered:
    parts = sorted(shares)
    if not parts:
        raise NotQualified("no shares given")
    known = participant_ids(name, scheme)
    unknown = [p for p in parts if p not in known]
    if unknown:
        raise BadParameter(f"unknown participants {unknown[:5]}")
    if name == "modsum":
        _need_all(shares, range(scheme.n), "all-or-nothing: every participant is needed")
        return Recovered(scheme.recover(_scalars(shares, range(scheme.n))))
    if name == "composite":
        return Recovered(scheme.recover(parts, shares))
    if name == "slope":
        if len(parts) < 2:
            raise NotQualified("2-threshold: two shares are needed")
        a, b = parts[:2]
        return Recovered(scheme.recover((scheme.labels[a], shares[a][0]), (scheme.labels[b], shares[b][0])))
    if name == "dyadic-ramp":
        _need_all(shares, range(1, scheme.n + 1), "all-or-nothing: every participant is needed")
        return Recovered(scheme.recover(_scalars(shares, range(1, scheme.n + 1))))
    if name == "projective":
        if len(parts) < 2:
            raise NotQualified("2-threshold: two shares are needed")
        a, b = parts[:2]
        pt = scheme.recover((a, shares[a]), (b, shares[b]))
        return Recovered(float(scheme.arc_parameter(pt.array)))
    if name in ("gauss-threshold", "ajtai-dwork"):
        if len(parts) < scheme.k:
            raise NotQualified(f"{scheme.k}-threshold: got only {len(parts)} shares")
        use = parts[: scheme.k]
        return Recovered(scheme.recover([(scheme.labels[p], shares[p][0]) for p in use]))
    if name == "random-degree":
        # exact whenever the realized degree is at most the number of shares
        if len(parts) < 2:
            raise NotQualified("random degree: at least two shares are needed")
        branch = gauss.GaussThresholdScheme.ajtai_dwork(len(parts), scheme.lam, [scheme.labels[p] for p in parts])
        return Recovered(branch.recover([(scheme.labels[p], shares[p][0]) for p in parts]))
    if name == "l2":
        _need_all(shares, range(1, scheme.n + 1), "all-or-nothing: every participant is needed")
        return Recovered(scheme.recover(_scalars(shares, range(1, scheme.n + 1))))
    if name in ("wiener-dense", "wiener-tree"):
        rec = scheme.recover({p: shares[p][0] for p in parts})
        if not rec.qualified:
            rule = (f"dense: largest gap {rec.max_gap:.6g} exceeds epsilon {scheme.epsilon_dense:.6g}"
                    if name == "wiener-dense" else "tree: the subset misses a whole subtree")
            raise NotQualified(rule)
        return Recovered(float(rec.estimate), rec.conditional_variance)
    if name == "wiener-limit":
        rec = scheme.recover({p: shares[p][0] for p in parts})
        return Recovered(rec.estimate, rec.conditional_variance)
    if name == "noisy":
        law = stat.NoisyScheme.conditional(_scalars(shares, parts))
        return Recovered(law.mean, law.variance)
    if name in ("obfuscated", "strip"):
        # strip obfuscating values 1 + angle also lie in [1, 10)
        sub = scheme if name == "obfuscated" else stat.ObfuscatedScheme(tuple(scheme.r_values))
        law = sub.conditional({p: shares[p][0] for p in parts})
        return Recovered(law.mean, law.variance)
    if name == "hilbert":
        return Recovered(scheme.recover(parts, shares))
    raise UnknownScheme(f"no recovery for {name!r}")


def deal(scheme, rng: np.random.Generator) -> Dealing:
    return scheme.deal(rng)


def secret_distance(name: str, a: float, b: float) -> float:
    """Distance between two secret values (circular for secrets in [0, 1))."""
    if name in ("modsum", "composite", "slope", "ajtai-dwork", "random-degree"):
        return float(circular_distance(a, b))
    if name == "projective":
        d = abs(a - b) % math.pi
        return min(d, math.pi - d)
    return abs(a - b)

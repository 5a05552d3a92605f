"""Density curves as CSV rows (``curve,<x>,density``), plus strip prefix-variance traces."""
from __future__ import annotations

import csv
import math
from typing import TextIO

import numpy as np

from ..dealing import fmt
from ..errors import BadParameter, UnknownScheme
from ..numerics import wrapped_normal_density
from ..rng import substream
from ..schemes import stat, uniform
from . import registry
from .config import ExperimentConfig
from .suites import DENSITY_TRIALS, PROJECTIVE_DISTANCES, mc

DENSITY_SCHEMES = ("projective", "wrapped-normal", "dyadic-ramp", "strip")


def projective_curves(cfg: ExperimentConfig):
    scheme = registry.build(cfg)
    part = cfg.get_int("participant", len(scheme.participant_lines) // 2)
    if not 0 <= part < len(scheme.participant_lines):
        raise BadParameter(f"participant must lie in [0, {len(scheme.participant_lines)})")
    method = cfg.get_str("method", "binning")
    if method not in ("binning", "rotational"):
        raise BadParameter(f"method must be binning or rotational, got {method!r}")
    bins = cfg.get_int("bins", 36)
    tol = cfg.get_float("tol", 1e-2)
    trials = max(cfg.trials, DENSITY_TRIALS)
    rows = []
    for j, d in enumerate(cfg.get_floats("d", PROJECTIVE_DISTANCES)):
        try:
            pt = scheme.point_at_distance(part, d)
            x, dens, _ = scheme.conditional_density(part, pt, substream(cfg.seed, j), bins=bins, trials=trials,
                                                    tol=tol, method=method)
        except ValueError as exc:
            raise BadParameter(str(exc)) from None
        rows += [(f"d={d:.6g}", xi, yi) for xi, yi in zip(x, dens)]
    return ("curve", "arc_parameter", "density"), rows


def wrapped_curves(cfg: ExperimentConfig):
    bins = cfg.get_int("bins", 100)
    if bins < 2:
        raise BadParameter("bins must be >= 2")
    x = (np.arange(bins) + 0.5) / bins
    rows = []
    for s in cfg.get_floats("sigmas", (1.0, 1.5, 3.0)):
        if s <= 0:
            raise BadParameter(f"sigma must be positive, got {s}")
        rows += [(f"sigma={s:g}", xi, yi) for xi, yi in zip(x, wrapped_normal_density(x, s))]
    return ("curve", "x", "density"), rows


def ramp_curve(cfg: ExperimentConfig):
    n = cfg.get_int("n", 20)
    if n < 2:
        raise BadParameter("n must be >= 2")
    scheme = uniform.DyadicRampScheme(n)
    bins = cfg.get_int("bins", 50)
    edges = np.linspace(0.0, 1.0, bins + 1)
    secret = mc(cfg, 0, lambda rng, size: scheme.sample(rng, size)[0])
    counts, _ = np.histogram(secret, bins=edges)
    dens = counts / (secret.size * (edges[1] - edges[0]))
    x = 0.5 * (edges[1:] + edges[:-1])
    return ("curve", "x", "density"), [(f"n={n}", xi, yi) for xi, yi in zip(x, dens)]


def strip_traces(cfg: ExperimentConfig):
    """Conditional variance of every distance-ordered prefix of one strip and of two strips."""
    scheme = registry.build(cfg)
    single = scheme.strip_members(math.pi / 4)
    union = stat.union_members(scheme.strip_members(math.pi / 6), scheme.strip_members(math.pi / 3))
    rows = []
    for name, members in (("strip pi/4", single), ("strips pi/6+pi/3", union)):
        var = stat.prefix_stat2_variances(scheme.r_values[members])
        rows += [(name, n, v) for n, v in enumerate(var, start=1)]
    return ("curve", "prefix_size", "conditional_variance"), rows


def run_density(cfg: ExperimentConfig):
    if cfg.scheme == "projective":
        return projective_curves(cfg)
    if cfg.scheme == "wrapped-normal":
        return wrapped_curves(cfg)
    if cfg.scheme == "dyadic-ramp":
        return ramp_curve(cfg)
    if cfg.scheme == "strip":
        return strip_traces(cfg)
    raise UnknownScheme(f"density supports {', '.join(DENSITY_SCHEMES)}; got {cfg.scheme!r}")


def write_density(header, rows, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for curve, x, y in rows:
        writer.writerow((curve, fmt(x), fmt(y)))


__all__ = ["run_density", "write_density", "DENSITY_SCHEMES"]

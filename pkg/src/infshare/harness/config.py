"""Experiment configuration.

Parameters arrive as strings (from ``key=value`` files or CLI flags) and
are converted by typed getters, so each scheme reports the parameter and
the invariant it violated in one place.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import BadParameter

RESERVED = ("scheme", "trials", "seed", "out", "workers")
_PI_TERM = re.compile(r"^\s*(?P<num>[-+]?[0-9.]*)\s*\*?\s*pi\s*(?:/\s*(?P<den>[0-9.]+))?\s*$")


def parse_float(text: str) -> float:
    """A float, also accepting multiples of pi such as ``pi/4`` or ``2pi/3``."""
    m = _PI_TERM.match(text)
    if m:
        num = m.group("num")
        coef = float(num) if num not in ("", "+", "-") else (-1.0 if num == "-" else 1.0)
        return coef * math.pi / (float(m.group("den")) if m.group("den") else 1.0)
    return float(text)


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    params: dict = field(default_factory=dict)
    trials: int = 100_000
    seed: int = 0
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise BadParameter(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise BadParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise BadParameter(f"workers must be >= 1, got {self.workers}")

    def with_params(self, **params) -> ExperimentConfig:
        merged = dict(self.params)
        merged.update({k: str(v) for k, v in params.items()})
        return replace(self, params=merged)

    def has(self, name: str) -> bool:
        return name in self.params

    def _raw(self, name: str):
        return self.params.get(name)

    def get_int(self, name: str, default: int) -> int:
        raw = self._raw(name)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise BadParameter(f"{name} must be an integer, got {raw!r}") from None

    def get_float(self, name: str, default: float) -> float:
        raw = self._raw(name)
        if raw is None:
            return default
        try:
            return parse_float(raw)
        except ValueError:
            raise BadParameter(f"{name} must be a number, got {raw!r}") from None

    def get_floats(self, name: str, default) -> tuple[float, ...]:
        raw = self._raw(name)
        if raw is None:
            return tuple(default)
        try:
            return tuple(parse_float(x) for x in raw.split(",") if x.strip())
        except ValueError:
            raise BadParameter(f"{name} must be a comma-separated list of numbers, got {raw!r}") from None

    def get_str(self, name: str, default: str | None) -> str | None:
        raw = self._raw(name)
        return default if raw is None else raw


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment. Keys are normalized to
    underscores so ``max-k`` and ``max_k`` are the same key."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise BadParameter(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_config(file_values: dict[str, str], overrides: dict[str, str]) -> ExperimentConfig:
    """Merge file values with CLI overrides (which win) into a config."""
    merged = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    scheme = merged.pop("scheme", None)
    if not scheme:
        raise BadParameter("no scheme given (use --scheme or scheme= in the config file)")
    try:
        trials = int(merged.pop("trials", 100_000))
        seed = int(merged.pop("seed", 0))
        workers = int(merged.pop("workers", 1))
    except ValueError as exc:
        raise BadParameter(str(exc)) from None
    out = merged.pop("out", None)
    return ExperimentConfig(scheme, {k: str(v) for k, v in merged.items()}, trials, seed, out, workers)

"""Schemes built from uniform reals mod 1.

* ``ModSumScheme``: n-party all-or-nothing, secret = (h_1 + ... + h_n) mod 1.
* ``CompositeScheme``: one independent mod-sum dealing per base element of
  a finitely generated structure; shares are tuples labelled by base element.
* ``SlopeScheme``: perfect 2-threshold over labels p in (0, 1),
  share = (r + s*p) mod 1.
* ``DyadicRampScheme``: secret = sum h_i / 2^i, truncated at n participants.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..access import AccessStructure
from ..dealing import Dealing
from ..errors import DegeneratePair, NotQualified, WrongShareCount
from ..numerics import mod1


@dataclass(frozen=True)
class ModSumScheme:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 participants")

    def sample(self, rng: np.random.Generator, size: int):
        """``size`` independent dealings as arrays: secrets (size,), shares (size, n)."""
        shares = rng.random((size, self.n))
        return mod1(shares.sum(axis=1)), shares

    def deal(self, rng: np.random.Generator) -> Dealing:
        h = rng.random(self.n)
        return Dealing(self.recover(h), {i: float(v) for i, v in enumerate(h)})

    def recover(self, all_shares: Sequence[float]) -> float:
        if len(all_shares) != self.n:
            raise WrongShareCount(f"need all {self.n} shares, got {len(all_shares)}")
        return float(mod1(float(np.sum(np.asarray(all_shares, dtype=float)))))


@dataclass(frozen=True)
class CompositeScheme:
    """Participants are addressed by their position in ``structure.participants``."""

    structure: AccessStructure
    blocks: tuple = field(init=False)
    layout: dict = field(init=False)

    def __post_init__(self):
        if self.structure.base is None:
            raise ValueError("composite scheme needs a base-given structure")
        pos = {p: i for i, p in enumerate(self.structure.participants)}
        blocks = sorted(tuple(sorted(pos[p] for p in b)) for b in self.structure.base)
        layout: dict[int, list[int]] = {i: [] for i in range(len(pos))}
        for bi, block in enumerate(blocks):
            for p in block:
                layout[p].append(bi)
        object.__setattr__(self, "blocks", tuple(blocks))
        object.__setattr__(self, "layout", {p: tuple(v) for p, v in layout.items()})

    @property
    def n(self) -> int:
        return len(self.structure.participants)

    def component_index(self, participant: int, block: int) -> int:
        return self.layout[participant].index(block)

    def _column(self, participant: int, block: int) -> int:
        # flat column of (participant, block) in the sampled component matrix
        col = 0
        for p in range(participant):
            col += len(self.layout[p])
        return col + self.component_index(participant, block)

    def sample(self, rng: np.random.Generator, size: int):
        """Secrets (size,) and a (size, total components) matrix of sub-shares.

        Column order follows participants, then each participant's blocks.
        """
        secrets = rng.random(size)
        ncols = sum(len(v) for v in self.layout.values())
        comps = np.empty((size, ncols))
        for bi, block in enumerate(self.blocks):
            free = rng.random((size, len(block) - 1))
            last = mod1(secrets - free.sum(axis=1))
            for j, p in enumerate(block[:-1]):
                comps[:, self._column(p, bi)] = free[:, j]
            comps[:, self._column(block[-1], bi)] = last
        return secrets, comps

    def columns_of(self, participants: Iterable[int]) -> list[int]:
        return [self._column(p, b) for p in sorted(participants) for b in self.layout[p]]

    def deal(self, rng: np.random.Generator) -> Dealing:
        secrets, comps = self.sample(rng, 1)
        shares = {
            p: tuple(float(comps[0, self._column(p, b)]) for b in self.layout[p]) for p in range(self.n)
        }
        return Dealing(float(secrets[0]), shares)

    def recover(self, subset: Iterable[int], shares: Mapping[int, Sequence[float]]) -> float:
        subset = frozenset(subset)
        for bi, block in enumerate(self.blocks):
            if set(block) <= subset:
                total = sum(float(shares[p][self.component_index(p, bi)]) for p in block)
                return float(mod1(total))
        raise NotQualified(f"subset {sorted(subset)} contains no base element")


@dataclass(frozen=True)
class SlopeScheme:
    labels: tuple

    def __post_init__(self):
        labels = tuple(float(p) for p in self.labels)
        if any(not 0.0 < p < 1.0 for p in labels):
            raise ValueError("labels must lie in (0, 1)")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        object.__setattr__(self, "labels", labels)

    def sample(self, rng: np.random.Generator, size: int):
        s = rng.random(size)
        r = rng.random(size)
        shares = mod1(r[:, None] + s[:, None] * np.asarray(self.labels)[None, :])
        return s, shares

    def deal(self, rng: np.random.Generator) -> Dealing:
        s, shares = self.sample(rng, 1)
        return Dealing(float(s[0]), {i: float(v) for i, v in enumerate(shares[0])})

    @staticmethod
    def share_of(secret: float, r: float, label: float) -> float:
        return float(mod1(r + secret * label))

    @staticmethod
    def recover(first: tuple[float, float], second: tuple[float, float]) -> float:
        """Secret from two (label, share) pairs."""
        (p, hp), (q, hq) = first, second
        if p == q:
            raise DegeneratePair("two shares with the same label")
        if p > q:
            (p, hp), (q, hq) = (q, hq), (p, hp)
        # s*(q-p) lies in [0, 1), so its fractional part is the value itself
        return float(mod1(hq - hp)) / (q - p)


@dataclass(frozen=True)
class DyadicRampScheme:
    """Participants are labelled 1..n; participant i carries weight 2^-i."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 participants")

    @property
    def weights(self) -> np.ndarray:
        return 0.5 ** np.arange(1, self.n + 1)

    @property
    def truncation_gap(self) -> float:
        return 0.5**self.n

    def sample(self, rng: np.random.Generator, size: int):
        h = rng.random((size, self.n))
        return h @ self.weights, h

    def deal(self, rng: np.random.Generator) -> Dealing:
        h = rng.random(self.n)
        return Dealing(self.recover(h), {i + 1: float(v) for i, v in enumerate(h)},
                       {"truncation_gap": self.truncation_gap})

    def recover(self, all_shares: Sequence[float]) -> float:
        if len(all_shares) != self.n:
            raise WrongShareCount(f"need all {self.n} shares, got {len(all_shares)}")
        return float(np.asarray(all_shares, dtype=float) @ self.weights)

    def interval_without(self, shares: Mapping[int, float], missing: int) -> tuple[float, float]:
        """Interval [lo, lo + 2^-missing) that the other n-1 shares pin the secret to."""
        if not 1 <= missing <= self.n:
            raise ValueError(f"participant {missing} out of range")
        lo = sum(float(shares[i]) * 0.5**i for i in range(1, self.n + 1) if i != missing)
        return lo, lo + 0.5**missing

    @property
    def secret_variance(self) -> float:
        return float(np.sum(self.weights**2) / 12.0)

"""Access structures over finite participant sets.

A structure is either generated by a Sperner base (its minimal qualified
sets) or by one of three symbolic rules. Infinite families such as "all
infinite subsets" are not representable here; each scheme module carries
its own finite-truncation rule instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Iterable, Iterator

from .errors import SpernerViolation, TrivialStructure, UnknownParticipant

RULES = ("threshold", "all", "minsize")


def _freeze(subset: Iterable[Hashable]) -> frozenset:
    return frozenset(subset)


@dataclass(frozen=True)
class AccessStructure:
    participants: tuple
    base: frozenset | None = None  # frozenset of frozensets
    rule: str | None = None
    param: int | None = None

    def __post_init__(self):
        if len(set(self.participants)) != len(self.participants):
            raise ValueError("participant ids must be unique")
        if len(self.participants) < 2:
            raise TrivialStructure("need at least two participants")
        if (self.base is None) == (self.rule is None):
            raise ValueError("give exactly one of base or rule")
        if self.rule is not None:
            if self.rule not in RULES:
                raise ValueError(f"unknown rule {self.rule!r}")
            if self.rule in ("threshold", "minsize"):
                if self.param is None or not 2 <= self.param <= len(self.participants):
                    raise TrivialStructure(
                        f"{self.rule} parameter must lie in [2, {len(self.participants)}]"
                    )

    # construction helpers
    @classmethod
    def threshold(cls, participants: Iterable, k: int) -> AccessStructure:
        return cls(tuple(participants), rule="threshold", param=k)

    @classmethod
    def min_size(cls, participants: Iterable, m: int) -> AccessStructure:
        return cls(tuple(participants), rule="minsize", param=m)

    @classmethod
    def all_or_nothing(cls, participants: Iterable) -> AccessStructure:
        return cls(tuple(participants), rule="all")

    @property
    def pset(self) -> frozenset:
        return frozenset(self.participants)

    def _check_known(self, subset: frozenset) -> None:
        unknown = subset - self.pset
        if unknown:
            raise UnknownParticipant(f"not participants: {sorted(map(str, unknown))}")

    def is_qualified(self, subset: Iterable) -> bool:
        subset = _freeze(subset)
        self._check_known(subset)
        if self.base is not None:
            return any(b <= subset for b in self.base)
        if self.rule == "all":
            return subset == self.pset
        return len(subset) >= self.param

    def minimal_elements(self) -> frozenset:
        if self.base is not None:
            return self.base
        if self.rule == "all":
            return frozenset([self.pset])
        return frozenset(frozenset(c) for c in combinations(self.participants, self.param))

    def qualified_sets(self) -> Iterator[frozenset]:
        """Enumerate every qualified subset (exponential; small structures only)."""
        for subset in powerset(self.participants):
            if self.is_qualified(subset):
                yield subset

    def maximal_unqualified(self) -> list[frozenset]:
        out = []
        for subset in powerset(self.participants):
            if self.is_qualified(subset):
                continue
            if all(self.is_qualified(subset | {p}) for p in self.pset - subset):
                out.append(subset)
        return out


def powerset(items: Iterable) -> Iterator[frozenset]:
    items = tuple(items)
    for r in range(len(items) + 1):
        for c in combinations(items, r):
            yield frozenset(c)


def from_base(participants: Iterable, base: Iterable[Iterable]) -> AccessStructure:
    """Structure generated by ``base``, which must be a Sperner family.

    Triviality (empty base, empty or singleton element) is reported before
    any containment between elements.
    """
    participants = tuple(participants)
    elems = [_freeze(b) for b in base]
    if not elems:
        raise TrivialStructure("empty base")
    for b in elems:
        if len(b) < 2:
            raise TrivialStructure(f"base element {sorted(map(str, b))} has fewer than two members")
    pset = frozenset(participants)
    for b in elems:
        if not b <= pset:
            raise UnknownParticipant(f"not participants: {sorted(map(str, b - pset))}")
    uniq = set(elems)
    for a in uniq:
        for b in uniq:
            if a < b:
                raise SpernerViolation(f"{sorted(map(str, a))} is contained in {sorted(map(str, b))}")
    return AccessStructure(participants, base=frozenset(uniq))


def gen(participants: Iterable, family: Iterable[Iterable]) -> set[frozenset]:
    """All supersets (within ``participants``) of members of ``family``."""
    family = [_freeze(f) for f in family]
    return {s for s in powerset(participants) if any(f <= s for f in family)}


def minimal_of(family: Iterable[Iterable]) -> frozenset:
    family = {_freeze(f) for f in family}
    return frozenset(b for b in family if not any(a < b for a in family))


# text serialization

def dumps(structure: AccessStructure) -> str:
    if structure.rule == "all":
        return "all\n"
    if structure.rule == "threshold":
        return f"threshold:{structure.param}\n"
    if structure.rule == "minsize":
        return f"minsize:{structure.param}\n"
    order = {p: i for i, p in enumerate(structure.participants)}
    lines = sorted(",".join(str(i) for i in sorted(order[p] for p in b)) for b in structure.base)
    return "\n".join(lines) + "\n"


def loads(text: str, participants: Iterable) -> AccessStructure:
    """Parse :func:`dumps` output; indices refer to positions in ``participants``."""
    participants = tuple(participants)
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) == 1:
        head = lines[0]
        if head == "all":
            return AccessStructure.all_or_nothing(participants)
        if ":" in head:
            name, _, value = head.partition(":")
            if name == "threshold":
                return AccessStructure.threshold(participants, int(value))
            if name == "minsize":
                return AccessStructure.min_size(participants, int(value))
            raise ValueError(f"unknown rule {name!r}")
    base = []
    for ln in lines:
        idx = [int(tok) for tok in ln.split(",")]
        if any(not 0 <= i < len(participants) for i in idx):
            raise UnknownParticipant(f"index out of range in {ln!r}")
        base.append([participants[i] for i in idx])
    return from_base(participants, base)

"""One realized draw of a scheme, and its CSV form.

CSV columns are ``trial,secret,participant_index,share_component_index,value``;
one row per share component. Floats are written with 17 significant
digits so a write/read cycle is lossless.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, TextIO

import numpy as np

from .errors import CsvFormatError

HEADER = ("trial", "secret", "participant_index", "share_component_index", "value")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Dealing:
    """``shares`` maps participant index to a float or a tuple of floats.

    ``meta`` holds scheme-specific extras (realized degree, truncation gap,
    the secret's scalar encoding for geometric secrets, ...).
    """

    secret: Any
    shares: Mapping[int, Any]
    meta: Mapping[str, Any] = field(default_factory=dict)

    def scalar_secret(self) -> float:
        if "secret_scalar" in self.meta:
            return float(self.meta["secret_scalar"])
        return float(self.secret)

    def components(self, participant: int) -> tuple[float, ...]:
        return tuple(float(v) for v in np.atleast_1d(np.asarray(self.shares[participant], dtype=float)))


def write_dealings(dealings: Iterable[Dealing], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for trial, d in enumerate(dealings):
        secret = fmt(d.scalar_secret())
        for p in sorted(d.shares):
            for c, v in enumerate(d.components(p)):
                writer.writerow((trial, secret, p, c, fmt(v)))


def dealings_to_csv(dealings: Iterable[Dealing]) -> str:
    buf = io.StringIO()
    write_dealings(dealings, buf)
    return buf.getvalue()


@dataclass
class ParsedDealing:
    secret: float | None
    shares: dict[int, tuple[float, ...]]


def read_dealings(src: TextIO) -> dict[int, ParsedDealing]:
    """Parse share CSV into ``{trial: ParsedDealing}``.

    The secret column may be empty (shares only). Component indices must be
    contiguous from 0 for each participant.
    """
    reader = csv.reader(src)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty input", line=1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise CsvFormatError(f"expected header {','.join(HEADER)}", line=1)
    raw: dict[int, dict] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(HEADER):
            raise CsvFormatError(f"expected {len(HEADER)} fields, got {len(row)}", line=lineno)
        try:
            trial = int(row[0])
            secret = float(row[1]) if row[1].strip() else None
            p = int(row[2])
            c = int(row[3])
            v = float(row[4])
        except ValueError as exc:
            raise CsvFormatError(str(exc), line=lineno) from None
        entry = raw.setdefault(trial, {"secret": secret, "shares": {}})
        comps = entry["shares"].setdefault(p, {})
        if c in comps:
            raise CsvFormatError(f"duplicate component {c} for participant {p}", line=lineno)
        comps[c] = v
    out = {}
    for trial, entry in raw.items():
        shares = {}
        for p, comps in entry["shares"].items():
            if sorted(comps) != list(range(len(comps))):
                raise CsvFormatError(f"participant {p} in trial {trial} has non-contiguous components")
            shares[p] = tuple(comps[i] for i in range(len(comps)))
        out[trial] = ParsedDealing(entry["secret"], shares)
    return out

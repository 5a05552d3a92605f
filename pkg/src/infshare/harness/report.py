"""Per-check verification results and their CSV form."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Iterable, TextIO

from ..dealing import fmt

REPORT_HEADER = ("check", "expected", "observed", "tolerance", "pass")


@dataclass(frozen=True)
class TrialReport:
    """One check. ``mode`` is "abs" (|observed - expected| <= tolerance),
    "upper" (observed < expected) or "lower" (observed > expected)."""

    check: str
    expected: float
    observed: float
    tolerance: float
    passed: bool
    trials: int = 0
    wall_time: float = 0.0
    mode: str = "abs"


def decide(expected: float, observed: float, tolerance: float, mode: str) -> bool:
    if not math.isfinite(observed):
        return False
    if mode == "abs":
        return abs(observed - expected) <= tolerance
    if mode == "upper":
        return observed < expected
    if mode == "lower":
        return observed > expected
    raise ValueError(f"unknown mode {mode!r}")


class Checks:
    """Collects reports; each report's wall time runs from the previous one."""

    def __init__(self):
        self.reports: list[TrialReport] = []
        self._last = time.perf_counter()

    def _add(self, check, expected, observed, tolerance, mode, trials):
        now = time.perf_counter()
        expected, observed, tolerance = float(expected), float(observed), float(tolerance)
        self.reports.append(
            TrialReport(check, expected, observed, tolerance, decide(expected, observed, tolerance, mode),
                        int(trials), now - self._last, mode)
        )
        self._last = now

    def close(self, check, expected, observed, tolerance, trials=0):
        self._add(check, expected, observed, tolerance, "abs", trials)

    def rel(self, check, expected, observed, rel_tol, trials=0):
        self._add(check, expected, observed, rel_tol * abs(expected), "abs", trials)

    def below(self, check, bound, observed, trials=0):
        self._add(check, bound, observed, 0.0, "upper", trials)

    def above(self, check, bound, observed, trials=0):
        self._add(check, bound, observed, 0.0, "lower", trials)

    def true(self, check, condition: bool, trials=0):
        self._add(check, 1.0, 1.0 if condition else 0.0, 0.0, "abs", trials)


def sorted_reports(reports: Iterable[TrialReport]) -> list[TrialReport]:
    return sorted(reports, key=lambda r: r.check)


def write_reports(reports: Iterable[TrialReport], out: TextIO) -> None:
    """CSV sorted by check name. Wall times are left out so output is reproducible."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for r in sorted_reports(reports):
        writer.writerow((r.check, fmt(r.expected), fmt(r.observed), fmt(r.tolerance), "true" if r.passed else "false"))


def reports_to_csv(reports: Iterable[TrialReport]) -> str:
    buf = io.StringIO()
    write_reports(reports, buf)
    return buf.getvalue()

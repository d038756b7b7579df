"""Test reports and the battery that groups them."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from errors import AnalysisError

logger = logging.getLogger(__name__)

# Every report carries verdicts at these levels, plus any configured one.
REPORT_LEVELS = (0.05, 0.01)

# The three tests whose union makes the combined decision.
UNION_TESTS = ("uniform", "berman", "wiener")


class InsufficientDataError(AnalysisError):
    """The transformed train is too short for the requested test."""


def level_key(level: float) -> str:
    return f"{level:g}"


def report_levels(level: float | None) -> tuple[float, ...]:
    levels = set(REPORT_LEVELS)
    if level is not None:
        levels.add(float(level))
    return tuple(sorted(levels, reverse=True))


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


@dataclass
class TestReport:
    """Outcome of one goodness-of-fit test.

    verdict_at maps a significance level to True when the test passes at it.
    """

    __test__ = False  # not a pytest class

    test_name: str
    statistics: dict[str, float]
    p_value: float | None
    verdict_at: dict[float, bool]
    plot_data: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.p_value is not None and not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"{self.test_name}: p-value {self.p_value!r} outside [0, 1]")

    def passes(self, level: float) -> bool:
        for known, verdict in self.verdict_at.items():
            if np.isclose(known, level, rtol=0, atol=1e-12):
                return verdict
        if self.p_value is not None:
            return self.p_value >= level
        raise KeyError(f"{self.test_name} has no verdict at level {level:g}")

    def rejects(self, level: float) -> bool:
        return not self.passes(level)

    def to_dict(self) -> dict[str, Any]:
        return {
            "test": self.test_name,
            "statistics": _jsonable(self.statistics),
            "p_value": _jsonable(self.p_value),
            "verdict_at": {
                level_key(lv): ("pass" if ok else "fail")
                for lv, ok in sorted(self.verdict_at.items(), reverse=True)
            },
            "plot_data": _jsonable(self.plot_data),
            "notes": list(self.notes),
        }


def verdicts_from_pvalue(p_value: float, levels) -> dict[float, bool]:
    return {float(lv): p_value >= lv for lv in levels}


@dataclass
class Battery:
    """Reports for one transformed train, keyed by test name."""

    reports: dict[str, TestReport]
    level: float
    skipped: dict[str, str] = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.reports.values())

    def __getitem__(self, name: str) -> TestReport:
        return self.reports[name]

    def rejected(self, level: float | None = None) -> bool:
        """True when any test that ran rejects at `level`."""
        level = self.level if level is None else level
        return any(r.rejects(level) for r in self.reports.values())

    def union_rejected(self, level: float | None = None) -> bool:
        """Combined decision: reject when uniform, Berman or Wiener rejects."""
        level = self.level if level is None else level
        return any(
            self.reports[name].rejects(level) for name in UNION_TESTS if name in self.reports
        )

    def add_caveat(self, text: str) -> None:
        self.caveats.append(text)
        for report in self.reports.values():
            report.notes.append(text)

    def to_dict(self) -> dict[str, Any]:
        return {
            "level": self.level,
            "rejected": self.rejected(),
            "union_rejected": self.union_rejected(),
            "reports": {name: r.to_dict() for name, r in self.reports.items()},
            "skipped": dict(self.skipped),
            "caveats": list(self.caveats),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

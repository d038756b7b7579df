"""Multiplicative stimulus term s(t) = p * f_chi2(m (t - t0))."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln, xlogy

from .hazards import ModelSpecError

# |s| below this leaves exp(s) == 1.0 in double precision.
_NEGLIGIBLE = np.finfo(float).eps / 4


@dataclass(frozen=True)
class StimulusTerm:
    """Scaled chi-square density with df degrees of freedom, switched on at t0."""

    p: float
    m: float
    t0: float
    df: float = 5.0

    def __post_init__(self):
        for name in ("p", "m", "t0", "df"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ModelSpecError(f"stimulus {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.m <= 0:
            raise ModelSpecError(f"stimulus m must be positive, got {self.m!r}")
        if self.df <= 2:
            # df <= 2 makes s jump (or diverge) at t0.
            raise ModelSpecError(f"stimulus df must exceed 2, got {self.df!r}")

    def _log_chi2(self, x):
        half = self.df / 2
        return xlogy(half - 1, x) - x / 2 - half * math.log(2) - gammaln(half)

    def value(self, t):
        """s(t); identically 0 for t <= t0."""
        x = self.m * (np.asarray(t, dtype=float) - self.t0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > 0, self.p * np.exp(self._log_chi2(np.maximum(x, 0.0))), 0.0)
        return float(out) if np.ndim(t) == 0 else out

    @property
    def mode_time(self) -> float:
        return self.t0 + (self.df - 2) / self.m

    @property
    def width(self) -> float:
        return 1.0 / self.m

    @property
    def integral(self) -> float:
        """Integral of s over (t0, inf)."""
        return self.p / self.m

    @cached_property
    def negligible_after(self) -> float:
        """Earliest time past the mode from which exp(s(t)) rounds to 1."""
        t = self.mode_time
        step = self.width
        while abs(self.value(t)) >= _NEGLIGIBLE:
            t += step
        return t

    def negligible_from(self, t: float) -> bool:
        """True when exp(s(u)) rounds to 1 for every u >= t."""
        return t >= self.negligible_after

    def vanishes_on(self, start: float, end: float) -> bool:
        """True when exp(s) == 1 on the whole of [start, end]."""
        return end <= self.t0 or self.negligible_from(start)

    @property
    def params(self) -> dict[str, float]:
        return {"p": self.p, "m": self.m, "t0": self.t0, "df": self.df}


def stimulus_value(t, s: StimulusTerm):
    return s.value(t)

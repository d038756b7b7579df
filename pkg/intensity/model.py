"""Conditional intensity lambda(t | H_t) = hazard(t - t_l) * exp(s(t)), its
integral over inter-event segments, the counting-process log-likelihood, and
the model specification file."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.integrate import quad

from config import config
from errors import AnalysisError
from trains import SpikeTrain

from .hazards import ExponentialHazard, ModelSpecError, RenewalHazard, make_hazard
from .stimulus import StimulusTerm

logger = logging.getLogger(__name__)

# QUADPACK spends 21 integrand evaluations per subinterval.
_EVALS_PER_SUBINTERVAL = 21
_QUAD_ABS_FLOOR = 1e-14


class IntegrationError(AnalysisError):
    """Quadrature did not reach the requested tolerance within its budget."""


@dataclass(frozen=True)
class IntensityModel:
    """Renewal hazard times an optional multiplicative stimulus.

    The history is the last event time only.
    """

    hazard: RenewalHazard
    stimulus: StimulusTerm | None = None

    @property
    def is_homogeneous(self) -> bool:
        return isinstance(self.hazard, ExponentialHazard) and self.stimulus is None

    @property
    def time_scale(self) -> float:
        scale = self.hazard.time_scale
        if self.stimulus is not None:
            scale = min(scale, self.stimulus.width)
        return scale

    def stimulus_at(self, t):
        if self.stimulus is None:
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        return self.stimulus.value(t)

    def log_intensity(self, t, last_event):
        return self.hazard.log_hazard(np.asarray(t) - last_event) + self.stimulus_at(t)

    def vanishes_on(self, start: float, end: float) -> bool:
        """True when the stimulus leaves lambda equal to the bare hazard on [start, end]."""
        return self.stimulus is None or self.stimulus.vanishes_on(start, end)

    def intensity_path(self, train: SpikeTrain, grid) -> np.ndarray:
        """Left-continuous lambda on a time grid; before the first event the
        history starts at time 0."""
        grid = np.asarray(grid, dtype=float)
        idx = np.searchsorted(train.times, grid, side="left") - 1
        last = np.where(idx >= 0, train.times[np.maximum(idx, 0)], 0.0)
        elapsed = np.maximum(grid - last, np.finfo(float).tiny)
        return np.exp(self.hazard.log_hazard(elapsed) + self.stimulus_at(grid))

    def to_dict(self) -> dict[str, Any]:
        spec: dict[str, Any] = {"hazard": {"family": self.hazard.family, **self.hazard.params}}
        if self.stimulus is not None:
            spec["stimulus"] = self.stimulus.params
        return spec


def conditional_intensity(t: float, last_event: float, model: IntensityModel) -> float:
    if t <= last_event:
        raise ValueError(f"t={t!r} must follow the last event {last_event!r}")
    return float(np.exp(model.log_intensity(t, last_event)))


def integrated_intensity(
    start: float,
    end: float,
    last_event: float,
    model: IntensityModel,
    tol: float | None = None,
    max_eval: int | None = None,
) -> float:
    """Integral of lambda over [start, end] with no event inside.

    Exact through the cumulative hazard where the stimulus vanishes, adaptive
    quadrature elsewhere.
    """
    tol = config.QUAD_TOL if tol is None else tol
    max_eval = config.QUAD_MAX_EVAL if max_eval is None else max_eval
    if not last_event <= start <= end:
        raise ValueError(
            f"need last_event <= start <= end, got {last_event!r}, {start!r}, {end!r}"
        )
    if end == start:
        return 0.0
    hazard = model.hazard
    if model.vanishes_on(start, end):
        upper = hazard.cumulative_hazard(end - last_event)
        return float(upper - hazard.cumulative_hazard(start - last_event))

    def integrand(u: float) -> float:
        return math.exp(model.log_intensity(u, last_event))

    stim = model.stimulus
    breaks = [p for p in (stim.t0, stim.mode_time) if start < p < end] if stim else []
    # QUADPACK needs a subinterval for every break point.
    limit = max(len(breaks) + 2, max_eval // _EVALS_PER_SUBINTERVAL)
    result = quad(
        integrand, start, end,
        epsabs=_QUAD_ABS_FLOOR, epsrel=tol, limit=limit,
        points=breaks or None, full_output=1,
    )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3 and abserr > tol * abs(value) + _QUAD_ABS_FLOOR:
        raise IntegrationError(
            f"quadrature on [{start}, {end}] did not converge "
            f"(estimate {value:.6g} +/- {abserr:.2g}): {result[3]}"
        )
    logger.debug(f"quad [{start:.6g}, {end:.6g}] = {value:.10g} (err {abserr:.2g})")
    return value


def segment_integrals(
    train: SpikeTrain,
    model: IntensityModel,
    tol: float | None = None,
    max_eval: int | None = None,
) -> tuple[np.ndarray, float]:
    """Integrated intensity over each inter-event interval plus the censored tail.

    Each segment starts at an event, which is also its history.
    """
    times = train.times
    if train.n == 0:
        raise ValueError("segment integrals need at least one event")
    starts, ends = times[:-1], times[1:]
    increments = np.asarray(model.hazard.cumulative_hazard(ends - starts), dtype=float).reshape(-1)
    if model.stimulus is not None:
        for j in range(starts.size):
            if not model.vanishes_on(starts[j], ends[j]):
                increments[j] = integrated_intensity(
                    starts[j], ends[j], starts[j], model, tol, max_eval
                )
    last = float(times[-1])
    tail = integrated_intensity(last, train.horizon, last, model, tol, max_eval)
    return increments, tail


def log_likelihood(
    train: SpikeTrain,
    model: IntensityModel,
    tol: float | None = None,
) -> float:
    """sum_j log lambda(t_j) - Lambda(t_1, T), conditioned on the first event.

    Returns -inf (with a warning) when the intensity vanishes at an event.
    """
    if train.n == 0:
        raise ValueError("the log-likelihood needs at least one event")
    times = train.times
    with np.errstate(divide="ignore"):
        log_rates = np.asarray(model.log_intensity(times[1:], times[:-1]), dtype=float)
    if log_rates.size and not np.all(np.isfinite(log_rates)):
        bad = int(np.flatnonzero(~np.isfinite(log_rates))[0]) + 1
        logger.warning(f"Intensity is zero at event {bad + 1} (t={times[bad]!r}); "
                       "log-likelihood is -inf")
        return -math.inf
    increments, tail = segment_integrals(train, model, tol)
    return float(log_rates.sum() - increments.sum() - tail)


# --- model specification file -------------------------------------------------


def _coerce_float(section: str, key: str, raw: Any) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ModelSpecError(f"{section}.{key}={raw!r} is not a number") from None


def parse_model(spec: dict[str, Any]) -> IntensityModel:
    """Build a model from {"hazard": {"family": ..., params}, "stimulus": {...}}.

    A flat mapping with "family" at the top level is accepted too.
    """
    if not isinstance(spec, dict):
        raise ModelSpecError("model specification must be a mapping")
    hazard_spec = dict(spec.get("hazard", spec))
    hazard_spec.pop("stimulus", None)
    family = hazard_spec.pop("family", None)
    if not family:
        raise ModelSpecError("model specification has no hazard family")
    params = {k: _coerce_float("hazard", k, v) for k, v in hazard_spec.items()}
    hazard = make_hazard(str(family), **params)

    stimulus = None
    stim_spec = spec.get("stimulus")
    if stim_spec:
        if not isinstance(stim_spec, dict):
            raise ModelSpecError("stimulus must be a mapping with p, m, t0")
        missing = {"p", "m", "t0"} - stim_spec.keys()
        if missing:
            raise ModelSpecError(f"stimulus is missing {', '.join(sorted(missing))}")
        unknown = set(stim_spec) - {"p", "m", "t0", "df"}
        if unknown:
            raise ModelSpecError(f"unknown stimulus keys: {', '.join(sorted(unknown))}")
        stimulus = StimulusTerm(
            **{k: _coerce_float("stimulus", k, v) for k, v in stim_spec.items()}
        )
    return IntensityModel(hazard, stimulus)


def _parse_key_values(text: str) -> dict[str, Any]:
    spec: dict[str, Any] = {"hazard": {}}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelSpecError(f"line {number}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("stimulus."):
            spec.setdefault("stimulus", {})[key.removeprefix("stimulus.")] = value
        else:
            spec["hazard"][key.removeprefix("hazard.")] = value
    return spec


def load_model(path: str | Path) -> IntensityModel:
    """Read a model file: JSON, or key=value lines (`stimulus.` prefix for the stimulus)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as e:
            raise ModelSpecError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None
    else:
        spec = _parse_key_values(text)
    model = parse_model(spec)
    logger.debug(f"Loaded model {model.to_dict()} from {path}")
    return model


def dump_model(model: IntensityModel) -> str:
    return json.dumps(model.to_dict(), indent=2, sort_keys=True)

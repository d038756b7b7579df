"""Thinning simulation of last-event conditional-intensity models, plus the
elementary samplers the Monte Carlo studies draw from."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config import config
from errors import AnalysisError
from intensity import IntensityModel, RenewalHazard
from trains import SpikeTrain

logger = logging.getLogger(__name__)

# Elapsed times are clipped here when the bound grid touches the last event.
_MIN_ELAPSED = 1e-12


class SimulationError(AnalysisError):
    """The thinning bound was exceeded or could not be formed."""


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by (seed, stream_id).

    Streams with the same identity produce identical draws regardless of the
    order or thread they run in.
    """

    seed: int
    stream_id: int = 0
    branch: tuple[int, ...] = ()
    _generator: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0 or any(b < 0 for b in self.branch):
            raise ValueError("seed, stream_id and branch entries must be non-negative")

    def generator(self) -> np.random.Generator:
        """The stream's Generator; later calls continue the same sequence."""
        if self._generator is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.branch))
            object.__setattr__(self, "_generator", np.random.Generator(np.random.Philox(seq)))
        return self._generator

    def spawn(self, count: int) -> list[RngStream]:
        """Child streams keyed (stream_id, *branch, i), independent of the parent."""
        return [RngStream(self.seed, self.stream_id, (*self.branch, i)) for i in range(count)]


def _window_bound(model: IntensityModel, start: float, end: float, last_event: float) -> float:
    if model.is_homogeneous:
        # Same expression as the acceptance test so the bound is never off by an ulp.
        return math.exp(model.log_intensity(end, last_event))
    grid = np.linspace(start, end, config.THINNING_GRID)
    elapsed = np.maximum(grid - last_event, _MIN_ELAPSED)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        rates = np.exp(model.log_intensity(last_event + elapsed, last_event))
    peak = float(np.nanmax(rates)) if rates.size else 0.0
    return config.THINNING_SAFETY * peak + model.hazard.asymptote


def thin_simulate(
    model: IntensityModel,
    horizon: float,
    rng: RngStream,
    window: float | None = None,
) -> SpikeTrain:
    """Draw one train on (0, horizon] by thinning.

    The history starts with a virtual event at time 0. Proposals come from a
    homogeneous rate that dominates lambda on a window of length `window`
    (the model's time scale by default), rebuilt after every acceptance.
    """
    if horizon < 0 or not math.isfinite(horizon):
        raise ValueError(f"horizon must be finite and non-negative, got {horizon!r}")
    window = model.time_scale if window is None else window
    if not (window > 0 and math.isfinite(window)):
        raise SimulationError(f"proposal window {window!r} is not a finite positive length")

    gen = rng.generator()
    events: list[float] = []
    t = last = 0.0
    proposals = 0
    worst_ratio = 0.0
    while t < horizon:
        w_end = min(t + window, horizon)
        bound = _window_bound(model, t, w_end, last)
        if not (math.isfinite(bound) and bound > 0):
            raise SimulationError(
                f"no finite dominating rate on [{t:.6g}, {w_end:.6g}] (got {bound!r})"
            )
        while True:
            proposal = t + gen.exponential(1.0 / bound)
            if proposal > w_end:
                t = w_end
                break
            proposals += 1
            rate = math.exp(model.log_intensity(proposal, last))
            if rate > bound:
                raise SimulationError(
                    f"intensity {rate:.6g} at t={proposal:.6g} exceeds the bound {bound:.6g}"
                )
            worst_ratio = max(worst_ratio, rate / bound)
            t = proposal
            if gen.random() * bound <= rate:
                events.append(t)
                last = t
                break

    logger.debug(
        f"Thinning: {len(events)} events from {proposals} proposals, "
        f"max lambda/bound {worst_ratio:.3f}"
    )
    return SpikeTrain(np.asarray(events, dtype=float), horizon)


def sample_unit_exponentials(n: int, rng: RngStream) -> np.ndarray:
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return rng.generator().standard_exponential(n)


def sample_intervals(hazard: RenewalHazard, n: int, rng: RngStream) -> np.ndarray:
    """n iid renewal intervals drawn from the hazard's interval distribution."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return hazard.sample(n, rng.generator())


def renewal_train(hazard: RenewalHazard, n: int, rng: RngStream) -> SpikeTrain:
    """Train whose first event follows a virtual event at 0; horizon at the last event."""
    times = np.cumsum(sample_intervals(hazard, n, rng))
    return SpikeTrain(times, float(times[-1]) if n else 0.0)

"""Time transformation of observed trains through the integrated intensity."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from intensity import IntensityModel, segment_integrals
from trains import SpikeTrain, TrainValueError, TransformedTrain

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CountingPath:
    """N(Λ) sampled at the mapped events, counted from the first one.

    residuals = (Λ - Λ_1) - N(Λ); for a correct model this behaves like a
    centered random walk.
    """

    lambdas: np.ndarray
    counts: np.ndarray
    residuals: np.ndarray


def time_transform(
    train: SpikeTrain,
    model: IntensityModel,
    tol: float | None = None,
) -> TransformedTrain:
    """Map event times to Λ_j = ∫_{t_1}^{t_j} λ, with Λ_1 = 0 and total = Λ(T).

    The censored tail Λ(T) - Λ_n is kept in `total` but carries no event.
    """
    if train.n == 0:
        raise TrainValueError("cannot transform an empty train")
    increments, tail = segment_integrals(train, model, tol)
    if increments.size and np.any(increments <= 0):
        j = int(np.flatnonzero(increments <= 0)[0])
        raise TrainValueError(
            f"integrated intensity between events {j + 1} and {j + 2} is not positive"
        )
    lambdas = np.concatenate(([0.0], np.cumsum(increments)))
    tt = TransformedTrain(lambdas, float(lambdas[-1]) + tail)
    logger.debug(f"Transformed {train.n} events; Λ_n={lambdas[-1]:.6g}, tail={tail:.6g}")
    return tt


def counting_on_lambda(tt: TransformedTrain) -> CountingPath:
    lambdas = tt.lambdas - tt.origin
    counts = np.arange(tt.n, dtype=float)
    return CountingPath(lambdas, counts, lambdas - counts)


def rescaling_slope(tt: TransformedTrain) -> float:
    """Least-squares slope through the origin of N against Λ; 1 for a correct model."""
    path = counting_on_lambda(tt)
    denom = float(np.dot(path.lambdas, path.lambdas))
    if denom == 0:
        raise TrainValueError("need at least two mapped events for a slope")
    return float(np.dot(path.lambdas, path.counts) / denom)

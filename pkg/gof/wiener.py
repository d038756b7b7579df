"""Donsker path of the centered transformed intervals and the band test on it."""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from boundary import BoundarySpec
from trains import TransformedTrain

from .report import InsufficientDataError, TestReport

logger = logging.getLogger(__name__)

# Points per unit time on the boundary curves kept for plotting.
_CURVE_POINTS = 201


@dataclass(frozen=True, eq=False)
class WienerPath:
    """Scaled partial sums S_k / sqrt(n) of ξ_j = ΔΛ_j - 1 at t = k/n."""

    n: int
    step_times: np.ndarray
    values: np.ndarray


def build_wiener_path(tt: TransformedTrain) -> WienerPath:
    if tt.n < 2:
        raise InsufficientDataError(
            f"the Wiener path needs at least 2 transformed times, got {tt.n}"
        )
    xi = tt.intervals - 1.0
    n = xi.size
    return WienerPath(
        n=n,
        step_times=np.arange(1, n + 1) / n,
        values=np.cumsum(xi) / math.sqrt(n),
    )


def _exit_ratios(path: WienerPath, band: BoundarySpec) -> np.ndarray:
    # The step path is constant on [t_k, t_{k+1}) and the boundary grows, so
    # the left end of every step is the binding comparison.
    return np.abs(path.values) / band.edge(path.step_times)


def wiener_process_test(
    path: WienerPath,
    band: BoundarySpec | Sequence[BoundarySpec],
) -> TestReport:
    """Pass at a band's level iff |X_k| < a + b sqrt(t_k) at every step.

    With several bands the first one supplies the statistic and plot data;
    each band contributes the verdict at its significance level.
    """
    bands = [band] if isinstance(band, BoundarySpec) else list(band)
    if not bands:
        raise ValueError("at least one band is required")

    verdicts: dict[float, bool] = {}
    primary = bands[0]
    ratios = _exit_ratios(path, primary)
    for spec in bands:
        r = ratios if spec is primary else _exit_ratios(path, spec)
        verdicts[round(spec.alpha, 12)] = bool(np.all(r < 1.0))

    outside = np.flatnonzero(ratios >= 1.0)
    first_exit = float(path.step_times[outside[0]]) if outside.size else None
    curve_t = np.linspace(0.0, 1.0, _CURVE_POINTS)
    edge = primary.edge(curve_t)
    report = TestReport(
        test_name="wiener",
        statistics={
            "max_ratio": float(ratios.max()) if ratios.size else 0.0,
            "terminal": float(path.values[-1]) if path.values.size else 0.0,
            "n": float(path.n),
        },
        p_value=None,
        verdict_at=verdicts,
        plot_data={
            "step_times": path.step_times,
            "values": path.values,
            "curve_t": curve_t,
            "upper": edge,
            "lower": -edge,
            "first_exit": first_exit,
            "a": primary.a,
            "b": primary.b,
        },
    )
    logger.debug(
        f"wiener: max |X|/c = {report.statistics['max_ratio']:.4f}, first exit {first_exit}"
    )
    return report

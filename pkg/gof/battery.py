"""Run the five tests on one transformed train."""
from __future__ import annotations

import logging
from collections.abc import Sequence

from boundary import BoundarySpec, band_for_level
from config import config
from simulate import RngStream
from trains import TransformedTrain

from .ogata import berman_test, serial_correlation_test, uniform_test, variance_time_test
from .report import Battery, InsufficientDataError, report_levels
from .wiener import build_wiener_path, wiener_process_test

logger = logging.getLogger(__name__)


def run_battery(
    tt: TransformedTrain,
    level: float | None = None,
    bands: Sequence[BoundarySpec] | None = None,
    n_perm: int | None = None,
    rng: RngStream | None = None,
    window_sizes=None,
) -> Battery:
    """Uniform, Berman, serial, variance-time and Wiener tests.

    Tests the train is too short for are recorded under `skipped`; the
    uniform, Berman and Wiener tests are required.
    """
    level = config.DEFAULT_LEVEL if level is None else level
    if bands is None:
        bands = [band_for_level(alpha) for alpha in report_levels(level)]
    elif not any(abs(b.alpha - level) < 1e-12 for b in bands):
        bands = [*bands, band_for_level(level)]
    rng = RngStream(config.DEFAULT_SEED) if rng is None else rng

    reports = {
        "uniform": uniform_test(tt, level),
        "berman": berman_test(tt, level),
    }
    skipped: dict[str, str] = {}
    try:
        reports["serial"] = serial_correlation_test(tt, n_perm, rng, level)
    except InsufficientDataError as e:
        skipped["serial"] = e.user_message
    try:
        reports["variance_time"] = variance_time_test(tt, window_sizes, level)
    except InsufficientDataError as e:
        skipped["variance_time"] = e.user_message
    reports["wiener"] = wiener_process_test(build_wiener_path(tt), bands)

    for name, reason in skipped.items():
        logger.warning(f"Skipped {name} test: {reason}")
    battery = Battery(reports, level, skipped)
    verdicts = ", ".join(
        f"{name}={'reject' if r.rejects(level) else 'pass'}" for name, r in reports.items()
    )
    logger.info(f"Battery at level {level:g} on {tt.n} events: {verdicts}")
    return battery

"""Ogata's residual tests on a transformed train: uniformity of the mapped
times, Berman's interval test, lag-1 serial correlation and variance-time."""
from __future__ import annotations

import logging

import numpy as np
from scipy.stats import binom, chi2, rankdata

from config import config
from simulate import RngStream
from trains import TransformedTrain

from .ks import ks_pvalue, ks_quantile, ks_uniform_statistic
from .report import (
    InsufficientDataError,
    TestReport,
    report_levels,
    verdicts_from_pvalue,
)

logger = logging.getLogger(__name__)

# Each window size must fit this many times into the transformed span.
MIN_WINDOWS = 10
DEFAULT_LADDER_SIZE = 10
_LADDER_START = 2.0
_LADDER_DIVISOR = 20.0
# Permutation rows ranked at once.
_PERM_BLOCK = 256


def _require(tt: TransformedTrain, minimum: int, test: str) -> None:
    if tt.n < minimum:
        raise InsufficientDataError(
            f"{test} needs at least {minimum} transformed times, got {tt.n}"
        )


def berman_values(tt: TransformedTrain) -> np.ndarray:
    """u_k = 1 - exp(-(Λ_{k+1} - Λ_k)), uniform on (0, 1) under the model."""
    return -np.expm1(-tt.intervals)


def _ecdf_plot(points: np.ndarray) -> dict:
    ordered = np.sort(points)
    m = ordered.size
    return {
        "x": ordered,
        "ecdf": np.arange(1, m + 1) / m,
        "band_95": ks_quantile(m, 0.95),
        "band_99": ks_quantile(m, 0.99),
    }


def uniform_points(tt: TransformedTrain) -> np.ndarray:
    """Interior mapped times rescaled to (0, 1) by the first and last ones."""
    span = tt.lambdas[-1] - tt.origin
    return (tt.lambdas[1:-1] - tt.origin) / span


def uniform_test(tt: TransformedTrain, level: float | None = None) -> TestReport:
    """KS test that the interior mapped times are uniform on (Λ_1, Λ_n)."""
    _require(tt, 3, "uniform test")
    points = uniform_points(tt)
    d = ks_uniform_statistic(points)
    p = ks_pvalue(points.size, d)
    report = TestReport(
        test_name="uniform",
        statistics={"D": d, "n": float(points.size)},
        p_value=p,
        verdict_at=verdicts_from_pvalue(p, report_levels(level)),
        plot_data=_ecdf_plot(points),
    )
    logger.debug(f"uniform: D={d:.5f}, p={p:.4g}")
    return report


def berman_test(tt: TransformedTrain, level: float | None = None) -> TestReport:
    """KS test that the Berman transforms u_k are uniform on (0, 1)."""
    _require(tt, 3, "Berman test")
    u = berman_values(tt)
    d = ks_uniform_statistic(u)
    p = ks_pvalue(u.size, d)
    plot = _ecdf_plot(u)
    plot["u"] = u
    report = TestReport(
        test_name="berman",
        statistics={"D": d, "n": float(u.size)},
        p_value=p,
        verdict_at=verdicts_from_pvalue(p, report_levels(level)),
        plot_data=plot,
    )
    logger.debug(f"berman: D={d:.5f}, p={p:.4g}")
    return report


def _rowwise_spearman(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    rx = rankdata(x, axis=-1)
    ry = rankdata(y, axis=-1)
    rx -= rx.mean(axis=-1, keepdims=True)
    ry -= ry.mean(axis=-1, keepdims=True)
    denom = np.sqrt((rx * rx).sum(axis=-1) * (ry * ry).sum(axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = (rx * ry).sum(axis=-1) / denom
    return np.where(denom > 0, rho, 0.0)


def serial_correlation_test(
    tt: TransformedTrain,
    n_perm: int | None = None,
    rng: RngStream | None = None,
    level: float | None = None,
) -> TestReport:
    """Spearman correlation of (u_k, u_{k+1}) with a permutation p-value.

    Shuffling the u sequence destroys serial order only, so the permutation
    distribution is exact under independence.
    """
    _require(tt, 4, "serial correlation test")
    n_perm = config.N_PERMUTATIONS if n_perm is None else n_perm
    if n_perm < 100:
        raise ValueError(f"n_perm must be at least 100, got {n_perm}")
    rng = RngStream(config.DEFAULT_SEED) if rng is None else rng
    gen = rng.spawn(1)[0].generator()

    u = berman_values(tt)
    rho = float(_rowwise_spearman(u[:-1], u[1:]))
    exceed = 0
    done = 0
    threshold = abs(rho) - 1e-12
    while done < n_perm:
        rows = min(_PERM_BLOCK, n_perm - done)
        shuffled = gen.permuted(np.tile(u, (rows, 1)), axis=1)
        perm_rho = _rowwise_spearman(shuffled[:, :-1], shuffled[:, 1:])
        exceed += int(np.count_nonzero(np.abs(perm_rho) >= threshold))
        done += rows
    p = (1 + exceed) / (n_perm + 1)

    report = TestReport(
        test_name="serial",
        statistics={"rho": rho, "pairs": float(u.size - 1), "n_perm": float(n_perm)},
        p_value=p,
        verdict_at=verdicts_from_pvalue(p, report_levels(level)),
        plot_data={"u_k": u[:-1], "u_next": u[1:]},
        notes=["serial dependence measured by Spearman rank correlation with a "
               "permutation p-value"],
    )
    logger.debug(f"serial: rho={rho:.4f}, p={p:.4g} ({n_perm} permutations)")
    return report


def default_window_sizes(span: float, count: int = DEFAULT_LADDER_SIZE) -> np.ndarray:
    """Log-spaced window sizes from 2 to span/20."""
    top = span / _LADDER_DIVISOR
    if top <= _LADDER_START:
        raise InsufficientDataError(
            f"transformed span {span:.4g} is too short for the default window ladder "
            f"(needs more than {_LADDER_START * _LADDER_DIVISOR:g})"
        )
    return np.geomspace(_LADDER_START, top, count)


def variance_band(w: float, windows: int, confidence: float) -> tuple[float, float]:
    """Pointwise acceptance interval for the window-count variance at size w."""
    tail = (1.0 - confidence) / 2
    dof = windows - 1
    low, high = chi2.ppf([tail, 1.0 - tail], dof)
    return float(w * low / dof), float(w * high / dof)


def variance_time_test(
    tt: TransformedTrain,
    window_sizes=None,
    level: float | None = None,
) -> TestReport:
    """Count events in non-overlapping windows of each size and compare the
    count variance with the Poisson value w.

    At significance α a size is flagged when its variance leaves the
    pointwise (1 - α) band; the test passes while the number of flagged sizes
    stays within the (1 - α) quantile of Binomial(L, α).
    """
    _require(tt, 2, "variance-time test")
    span = tt.total - tt.origin
    sizes = (
        default_window_sizes(span)
        if window_sizes is None
        else np.asarray(window_sizes, dtype=float).ravel()
    )
    if sizes.size == 0 or np.any(sizes <= 0):
        raise ValueError("window sizes must be positive")

    counts_k = np.floor(span / sizes).astype(int)
    if np.any(counts_k < MIN_WINDOWS):
        bad = float(sizes[np.argmax(counts_k < MIN_WINDOWS)])
        raise InsufficientDataError(
            f"window size {bad:.4g} fits only {int(span // bad)} times into the "
            f"transformed span {span:.4g} (need {MIN_WINDOWS})"
        )

    events = tt.lambdas - tt.origin
    means = np.empty(sizes.size)
    variances = np.empty(sizes.size)
    for i, (w, k) in enumerate(zip(sizes, counts_k, strict=True)):
        edges = np.arange(k + 1) * w
        counts = np.diff(np.searchsorted(events, edges, side="right"))
        means[i] = counts.mean()
        variances[i] = counts.var(ddof=1)

    levels = report_levels(level)
    verdicts: dict[float, bool] = {}
    outside_at: dict[str, float] = {}
    bands = {}
    for alpha in levels:
        band = np.array(
            [variance_band(w, k, 1.0 - alpha) for w, k in zip(sizes, counts_k, strict=True)]
        )
        outside = int(np.count_nonzero((variances < band[:, 0]) | (variances > band[:, 1])))
        allowed = int(binom.ppf(1.0 - alpha, sizes.size, alpha))
        verdicts[alpha] = outside <= allowed
        outside_at[f"outside_{alpha:g}"] = float(outside)
        bands[alpha] = band

    band95 = bands.get(0.05, next(iter(bands.values())))
    report = TestReport(
        test_name="variance_time",
        statistics={"sizes": float(sizes.size), **outside_at},
        p_value=None,
        verdict_at=verdicts,
        plot_data={
            "window": sizes,
            "mean": means,
            "variance": variances,
            "band_low": band95[:, 0],
            "band_high": band95[:, 1],
        },
    )
    logger.debug(f"variance-time: {sizes.size} sizes, {outside_at}")
    return report

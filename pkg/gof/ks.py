"""Exact one-sample Kolmogorov-Smirnov distribution."""
from __future__ import annotations

import numpy as np
from scipy.stats import kstest, kstwo


def _check(n: int, d: float) -> None:
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    if d < 0:
        raise ValueError(f"statistic must be non-negative, got {d}")


def ks_cdf(n: int, d: float) -> float:
    """P(D_n < d) for the one-sample KS statistic of n uniform draws."""
    _check(n, d)
    if d >= 1.0:
        return 1.0
    # D_n >= 1/(2n) always
    if n * d <= 0.5:
        return 0.0
    return float(min(max(kstwo.cdf(d, n), 0.0), 1.0))


def ks_pvalue(n: int, d: float) -> float:
    _check(n, d)
    if d >= 1.0:
        return 0.0
    if n * d <= 0.5:
        return 1.0
    # sf keeps precision in the far tail where 1 - cdf would round to 0
    return float(min(max(kstwo.sf(d, n), 0.0), 1.0))


def ks_quantile(n: int, level: float) -> float:
    """The d with ks_cdf(n, d) = level."""
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    return float(kstwo.ppf(level, n))


def ks_uniform_statistic(points) -> float:
    """KS distance between the sample and the uniform law on (0, 1)."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise ValueError("KS statistic of an empty sample")
    return float(kstest(points, "uniform").statistic)

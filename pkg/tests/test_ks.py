"""Exact one-sample Kolmogorov-Smirnov distribution."""
import math

import numpy as np
import pytest
from scipy.stats import kstwo

from gof import ks_cdf, ks_pvalue, ks_quantile, ks_uniform_statistic
from simulate import RngStream

CASES = [(1, 0.75), (5, 0.3), (10, 0.2), (20, 0.25), (50, 0.1), (100, 0.13), (400, 0.05),
         (1000, 0.02), (1000, 0.09), (10, 0.853), (200, 0.054)]


@pytest.mark.parametrize(("n", "d"), CASES)
def test_matches_scipy_exact_distribution(n, d):
    assert ks_cdf(n, d) == pytest.approx(kstwo.cdf(d, n), abs=1e-7)


def test_single_draw_closed_form():
    for d in (0.55, 0.7, 0.9):
        assert ks_cdf(1, d) == pytest.approx(2 * d - 1)


@pytest.mark.parametrize("n", [1, 3, 17, 200])
def test_trivial_bounds(n):
    assert ks_cdf(n, 0.5 / n) == pytest.approx(0.0, abs=1e-12)
    assert ks_cdf(n, 0.25 / n) == 0.0
    assert ks_cdf(n, 1.0) == 1.0
    assert ks_cdf(n, 1.5) == 1.0


def test_cdf_is_monotone():
    grid = np.linspace(0.01, 0.45, 60)
    values = [ks_cdf(30, d) for d in grid]
    assert np.all(np.diff(values) >= -1e-12)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        ks_cdf(0, 0.1)
    with pytest.raises(ValueError):
        ks_cdf(10, -0.1)
    with pytest.raises(ValueError):
        ks_quantile(10, 1.0)


@pytest.mark.parametrize(("n", "level"), [(10, 0.95), (100, 0.99), (500, 0.95)])
def test_quantile_inverts_the_cdf(n, level):
    d = ks_quantile(n, level)
    assert ks_cdf(n, d) == pytest.approx(level, abs=1e-7)


def test_pvalue_and_statistic():
    points = np.array([0.1, 0.4, 0.7])
    d = ks_uniform_statistic(points)
    assert d == pytest.approx(0.3)
    assert ks_pvalue(3, d) == pytest.approx(1.0 - kstwo.cdf(0.3, 3), abs=1e-9)


@pytest.mark.slow
def test_agrees_with_monte_carlo():
    n, d, reps = 20, 0.25, 1_000_000
    gen = RngStream(6).generator()
    below = 0
    i = np.arange(1, n + 1) / n
    for _ in range(reps // 100_000):
        u = np.sort(gen.random((100_000, n)), axis=1)
        stat = np.maximum((i - u).max(axis=1), (u - (i - 1 / n)).max(axis=1))
        below += int(np.count_nonzero(stat < d))
    p = ks_cdf(n, d)
    se = math.sqrt(p * (1 - p) / reps)
    assert abs(below / reps - p) < 3 * se


def test_pvalue_keeps_precision_in_the_far_tail():
    p = ks_pvalue(10, 0.95)
    assert 0 < p < 1e-10
    assert p == pytest.approx(kstwo.sf(0.95, 10), rel=1e-9)
    assert ks_pvalue(10, 0.01) == 1.0
    assert ks_pvalue(10, 1.0) == 0.0

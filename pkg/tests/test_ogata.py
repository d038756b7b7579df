"""Uniform, Berman, serial-correlation and variance-time tests."""
import math

import numpy as np
import pytest
from scipy.stats import chi2

from gof import (
    InsufficientDataError,
    berman_test,
    berman_values,
    default_window_sizes,
    serial_correlation_test,
    uniform_points,
    uniform_test,
    variance_band,
    variance_time_test,
)
from simulate import RngStream, sample_unit_exponentials
from trains import TransformedTrain


def _unit_train(n: int, stream: int = 0) -> TransformedTrain:
    return TransformedTrain.from_intervals(sample_unit_exponentials(n, RngStream(99, stream)))


def _regular_train(n: int) -> TransformedTrain:
    return TransformedTrain.from_intervals(np.ones(n))


def test_uniform_points_are_interior_and_rescaled():
    tt = TransformedTrain([2.0, 3.0, 5.0, 6.0], 7.0)
    np.testing.assert_allclose(uniform_points(tt), [0.25, 0.75])


def test_berman_values():
    tt = TransformedTrain.from_intervals([math.log(2.0), math.log(4.0)])
    np.testing.assert_allclose(berman_values(tt), [0.5, 0.75])


@pytest.mark.parametrize("test", [uniform_test, berman_test])
def test_ks_tests_need_three_times(test):
    with pytest.raises(InsufficientDataError):
        test(TransformedTrain([0.0, 1.0], 1.0))


def test_berman_rejects_regular_intervals():
    report = berman_test(_regular_train(200))
    assert report.p_value < 1e-6
    assert report.rejects(0.05)
    assert report.rejects(0.01)


def test_uniform_report_shape():
    report = uniform_test(_unit_train(300))
    assert report.test_name == "uniform"
    assert report.statistics["n"] == 298
    assert set(report.verdict_at) == {0.05, 0.01}
    assert report.plot_data["band_99"] > report.plot_data["band_95"] > 0
    assert len(report.plot_data["x"]) == 298


def test_configured_level_gets_its_own_verdict():
    report = berman_test(_unit_train(100), level=0.1)
    assert set(report.verdict_at) == {0.1, 0.05, 0.01}
    assert report.passes(0.1) == (report.p_value >= 0.1)


def test_serial_detects_trending_intervals():
    tt = TransformedTrain.from_intervals(np.linspace(0.1, 3.0, 60))
    report = serial_correlation_test(tt, n_perm=500, rng=RngStream(1))
    assert report.statistics["rho"] == pytest.approx(1.0)
    assert report.p_value == pytest.approx(1 / 501)
    assert report.rejects(0.01)


def test_serial_is_reproducible_for_a_stream():
    tt = _unit_train(80)
    a = serial_correlation_test(tt, n_perm=300, rng=RngStream(4, 2))
    b = serial_correlation_test(tt, n_perm=300, rng=RngStream(4, 2))
    assert a.p_value == b.p_value
    assert 1 / 301 <= a.p_value <= 1.0


def test_serial_needs_enough_permutations_and_data():
    with pytest.raises(ValueError):
        serial_correlation_test(_unit_train(20), n_perm=50)
    with pytest.raises(InsufficientDataError):
        serial_correlation_test(TransformedTrain([0.0, 1.0, 2.0], 2.0))


def test_variance_band_uses_chi_square_quantiles():
    low, high = variance_band(4.0, 25, 0.95)
    assert low == pytest.approx(4.0 * chi2.ppf(0.025, 24) / 24)
    assert high == pytest.approx(4.0 * chi2.ppf(0.975, 24) / 24)
    assert low < 4.0 < high


def test_default_window_ladder():
    sizes = default_window_sizes(1000.0)
    assert sizes.size == 10
    assert sizes[0] == pytest.approx(2.0)
    assert sizes[-1] == pytest.approx(50.0)
    with pytest.raises(InsufficientDataError):
        default_window_sizes(40.0)


def test_variance_time_rejects_regular_spiking():
    report = variance_time_test(_regular_train(2000))
    assert report.rejects(0.05)
    assert report.statistics["outside_0.05"] >= 8


def test_variance_time_report_shape():
    report = variance_time_test(_unit_train(2000), window_sizes=[2.0, 5.0, 10.0])
    assert report.p_value is None
    assert set(report.verdict_at) == {0.05, 0.01}
    data = report.plot_data
    assert len(data["window"]) == len(data["variance"]) == 3
    np.testing.assert_allclose(data["mean"], [2.0, 5.0, 10.0], rtol=0.1)


def test_variance_time_needs_ten_windows_per_size():
    with pytest.raises(InsufficientDataError):
        variance_time_test(_unit_train(100), window_sizes=[2.0, 20.0])
    with pytest.raises(InsufficientDataError):
        variance_time_test(_unit_train(30))


@pytest.mark.slow
@pytest.mark.parametrize("test", ["uniform", "berman", "serial"])
def test_null_p_values_are_uniform(test):
    from scipy.stats import kstest

    run = {
        "uniform": lambda tt, r: uniform_test(tt),
        "berman": lambda tt, r: berman_test(tt),
        "serial": lambda tt, r: serial_correlation_test(tt, n_perm=200, rng=RngStream(7, r)),
    }[test]
    p_values = [run(_unit_train(100, r), r).p_value for r in range(2000)]
    assert kstest(p_values, "uniform").pvalue > 0.01

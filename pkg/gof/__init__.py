"""Goodness-of-fit tests on time-transformed trains."""
from .battery import run_battery
from .ks import ks_cdf, ks_pvalue, ks_quantile, ks_uniform_statistic
from .ogata import (
    berman_test,
    berman_values,
    default_window_sizes,
    serial_correlation_test,
    uniform_points,
    uniform_test,
    variance_band,
    variance_time_test,
)
from .report import (
    REPORT_LEVELS,
    UNION_TESTS,
    Battery,
    InsufficientDataError,
    TestReport,
)
from .wiener import WienerPath, build_wiener_path, wiener_process_test

__all__ = [
    "REPORT_LEVELS",
    "UNION_TESTS",
    "Battery",
    "InsufficientDataError",
    "TestReport",
    "WienerPath",
    "berman_test",
    "berman_values",
    "build_wiener_path",
    "default_window_sizes",
    "ks_cdf",
    "ks_pvalue",
    "ks_quantile",
    "ks_uniform_statistic",
    "run_battery",
    "serial_correlation_test",
    "uniform_points",
    "uniform_test",
    "variance_band",
    "variance_time_test",
    "wiener_process_test",
]

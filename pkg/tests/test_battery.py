"""Test reports, the five-test battery and its JSON form."""
import json

import numpy as np
import pytest

from boundary import DEFAULT_BANDS
from gof import UNION_TESTS, Battery, TestReport, run_battery
from simulate import RngStream, sample_unit_exponentials
from trains import TransformedTrain


def _unit_train(n: int, stream: int = 0) -> TransformedTrain:
    return TransformedTrain.from_intervals(sample_unit_exponentials(n, RngStream(31, stream)))


def _report(name: str, p_value, verdicts) -> TestReport:
    return TestReport(name, {}, p_value, verdicts)


def test_report_falls_back_to_the_p_value():
    report = _report("berman", 0.03, {0.05: False, 0.01: True})
    assert report.passes(0.01)
    assert report.rejects(0.05)
    assert report.passes(0.02)
    assert report.rejects(0.1)


def test_report_without_p_value_needs_a_verdict():
    report = _report("wiener", None, {0.05: True})
    with pytest.raises(KeyError):
        report.passes(0.1)


def test_p_value_outside_unit_interval_is_a_bug():
    with pytest.raises(ValueError):
        _report("uniform", 1.5, {})


def test_battery_runs_all_five_tests():
    battery = run_battery(_unit_train(600), n_perm=200, rng=RngStream(1))
    assert set(battery.reports) == {"uniform", "berman", "serial", "variance_time", "wiener"}
    assert battery.skipped == {}
    for report in battery:
        assert {0.05, 0.01} <= set(report.verdict_at)


def test_short_trains_skip_serial_and_variance_tests():
    battery = run_battery(_unit_train(30), n_perm=200)
    assert "variance_time" in battery.skipped
    assert "variance_time" not in battery.reports
    assert set(UNION_TESTS) <= set(battery.reports)


def test_regular_train_is_rejected():
    battery = run_battery(TransformedTrain.from_intervals(np.ones(600)), n_perm=200)
    assert battery.rejected()
    assert battery.union_rejected()
    assert battery["berman"].rejects(0.01)


def test_rejection_follows_the_reports():
    reports = {
        "uniform": _report("uniform", 0.5, {0.05: True, 0.01: True}),
        "berman": _report("berman", 0.5, {0.05: True, 0.01: True}),
        "serial": _report("serial", 0.02, {0.05: False, 0.01: True}),
        "wiener": _report("wiener", None, {0.05: True, 0.01: True}),
    }
    battery = Battery(reports, 0.05)
    assert battery.rejected()
    assert not battery.union_rejected()
    assert not battery.rejected(0.01)


def test_explicit_bands_get_the_configured_level_added():
    battery = run_battery(
        _unit_train(200), level=0.01, bands=[DEFAULT_BANDS[0.95]], n_perm=200
    )
    assert set(battery["wiener"].verdict_at) >= {0.05, 0.01}


def test_json_is_deterministic_and_complete():
    tt = _unit_train(400)
    first = run_battery(tt, n_perm=200, rng=RngStream(5)).to_json()
    second = run_battery(tt, n_perm=200, rng=RngStream(5)).to_json()
    assert first == second
    data = json.loads(first)
    assert data["level"] == 0.05
    assert data["reports"]["wiener"]["verdict_at"].keys() == {"0.05", "0.01"}
    assert data["reports"]["wiener"]["p_value"] is None
    assert isinstance(data["reports"]["berman"]["plot_data"]["x"], list)


def test_caveats_reach_every_report():
    battery = run_battery(_unit_train(100), n_perm=200)
    battery.add_caveat("parameters were fitted")
    assert battery.caveats == ["parameters were fitted"]
    assert all("parameters were fitted" in r.notes for r in battery)

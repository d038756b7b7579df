"""Hazard families, the stimulus term, segment integrals and model files."""
import json
import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from intensity import (
    ExponentialHazard,
    IntegrationError,
    IntensityModel,
    InverseGaussianHazard,
    LogLogisticHazard,
    ModelSpecError,
    StimulusTerm,
    conditional_intensity,
    dump_model,
    ig_hazard,
    integrated_intensity,
    load_model,
    log_likelihood,
    make_hazard,
    parse_model,
    resolve_family,
    segment_integrals,
    stimulus_value,
)
from trains import SpikeTrain

X = np.array([0.01, 0.05, 0.075, 0.2, 1.0, 5.0])
# scipy forms the inverse-Gaussian survivor by subtraction; compare where it is accurate.
X_BODY = X[X <= 0.2]


def _driven_model() -> IntensityModel:
    return IntensityModel(InverseGaussianHazard(0.075, 3.0), StimulusTerm(p=20, m=5, t0=4))


def test_invgauss_matches_scipy():
    mu, s2 = 0.075, 3.0
    hz = InverseGaussianHazard(mu, s2)
    ref = stats.invgauss(mu * s2, scale=1.0 / s2)
    np.testing.assert_allclose(hz.log_density(X), ref.logpdf(X), rtol=1e-10)
    np.testing.assert_allclose(hz.log_survivor(X_BODY), ref.logsf(X_BODY), rtol=1e-8)


def test_invgauss_survivor_stays_finite_deep_in_the_tail():
    hz = InverseGaussianHazard(1.0, 0.05)
    value = hz.log_survivor(30.0)
    assert math.isfinite(value)
    assert value < -100


def test_invgauss_hazard_tends_to_its_asymptote():
    hz = InverseGaussianHazard(0.5, 2.0)
    assert hz.hazard(200.0) == pytest.approx(hz.asymptote, rel=1e-2)


def test_loglogistic_matches_scipy_fisk():
    hz = LogLogisticHazard(alpha=0.3, beta=2.5)
    ref = stats.fisk(2.5, scale=0.3)
    np.testing.assert_allclose(hz.log_density(X), ref.logpdf(X), rtol=1e-10)
    np.testing.assert_allclose(hz.log_survivor(X), ref.logsf(X), rtol=1e-10)
    np.testing.assert_allclose(hz.log_hazard(X), ref.logpdf(X) - ref.logsf(X), rtol=1e-10)


@pytest.mark.parametrize(
    "hazard",
    [InverseGaussianHazard(0.075, 3.0), LogLogisticHazard(0.3, 2.5), ExponentialHazard(4.0)],
)
def test_density_integrates_to_cdf(hazard):
    area, _ = quad(hazard.pdf, 0, 1.0, limit=200)
    assert area == pytest.approx(hazard.cdf(1.0), abs=1e-7)


@pytest.mark.parametrize(
    "hazard",
    [InverseGaussianHazard(0.075, 3.0), LogLogisticHazard(0.3, 2.5), ExponentialHazard(4.0)],
)
def test_cumulative_hazard_is_minus_log_survivor(hazard):
    assert hazard.cumulative_hazard(0.0) == 0.0
    np.testing.assert_allclose(hazard.cumulative_hazard(X), -hazard.log_survivor(X))


@pytest.mark.parametrize(
    ("family", "params"),
    [("invgauss", {"mu": 0.0, "sigma2": 1.0}), ("loglogistic", {"alpha": 1.0, "beta": -2.0}),
     ("exponential", {"rate": math.inf})],
)
def test_invalid_parameters_are_rejected(family, params):
    with pytest.raises(ModelSpecError):
        make_hazard(family, **params)


def test_family_aliases():
    assert resolve_family("Inverse-Gaussian") == "invgauss"
    assert resolve_family("poisson") == "exponential"
    with pytest.raises(ModelSpecError):
        resolve_family("weibull")


def test_stimulus_is_a_scaled_chi_square_density():
    s = StimulusTerm(p=20, m=5, t0=4)
    t = np.array([3.0, 4.0, 4.3, 4.6, 5.5])
    expected = np.where(t > 4, 20 * stats.chi2.pdf(5 * (t - 4), df=5), 0.0)
    np.testing.assert_allclose(s.value(t), expected, rtol=1e-10)
    assert s.mode_time == pytest.approx(4.6)
    assert s.integral == pytest.approx(4.0)


def test_stimulus_negligible_region():
    s = StimulusTerm(p=20, m=5, t0=4)
    late = s.negligible_after
    assert late > s.mode_time
    assert s.negligible_from(late)
    assert not s.negligible_from(s.mode_time)
    assert math.exp(s.value(late + 1.0)) == 1.0
    assert s.vanishes_on(0.0, 4.0)
    assert not s.vanishes_on(3.0, 5.0)


def test_stimulus_rejects_low_degrees_of_freedom():
    with pytest.raises(ModelSpecError):
        StimulusTerm(p=1, m=1, t0=0, df=2)


def test_conditional_intensity_needs_time_after_last_event():
    model = IntensityModel(ExponentialHazard(3.0))
    assert conditional_intensity(1.0, 0.5, model) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        conditional_intensity(0.5, 0.5, model)


def test_closed_form_segment_matches_quadrature():
    model = IntensityModel(InverseGaussianHazard(0.075, 3.0))
    exact = integrated_intensity(1.02, 1.3, 1.0, model)
    numeric, _ = quad(
        lambda u: model.hazard.hazard(u - 1.0), 1.02, 1.3, epsabs=1e-13, epsrel=1e-12
    )
    assert exact == pytest.approx(numeric, rel=1e-9)


def test_stimulus_segment_uses_quadrature():
    model = _driven_model()
    value = integrated_intensity(4.0, 4.8, 3.9, model)
    numeric, _ = quad(
        lambda u: math.exp(model.log_intensity(u, 3.9)), 4.0, 4.8, points=[4.6], limit=200
    )
    assert value == pytest.approx(numeric, rel=1e-7)
    assert value > model.hazard.cumulative_hazard(0.9) - model.hazard.cumulative_hazard(0.1)


def test_quadrature_budget_exhaustion_raises():
    model = IntensityModel(ExponentialHazard(1.0), StimulusTerm(p=200, m=50, t0=0))
    with pytest.raises(IntegrationError):
        integrated_intensity(0.0, 2.0, 0.0, model, tol=1e-14, max_eval=21)


def test_segment_integrals_cover_every_interval_and_the_tail():
    train = SpikeTrain([0.5, 1.0, 2.0], 3.0)
    increments, tail = segment_integrals(train, IntensityModel(ExponentialHazard(2.0)))
    np.testing.assert_allclose(increments, [1.0, 2.0])
    assert tail == pytest.approx(2.0)


def test_log_likelihood_of_poisson_train():
    rate = 2.0
    train = SpikeTrain([0.5, 1.0, 2.0], 3.0)
    ll = log_likelihood(train, IntensityModel(ExponentialHazard(rate)))
    assert ll == pytest.approx(2 * math.log(rate) - rate * (3.0 - 0.5))


def test_intensity_path_restarts_at_each_event():
    model = IntensityModel(ExponentialHazard(1.0), StimulusTerm(p=2, m=1, t0=0))
    train = SpikeTrain([1.0, 2.0], 3.0)
    grid = np.array([0.5, 1.5, 2.5])
    np.testing.assert_allclose(model.intensity_path(train, grid), np.exp(model.stimulus_at(grid)))


def test_model_file_formats(tmp_path):
    as_json = tmp_path / "m.json"
    as_json.write_text(dump_model(_driven_model()))
    as_kv = tmp_path / "m.txt"
    as_kv.write_text(
        "# renewal model with a stimulus\nfamily=invgauss\nmu=0.075\nsigma2=3\n"
        "stimulus.p=20\nstimulus.m=5\nstimulus.t0=4\n"
    )
    for path in (as_json, as_kv):
        model = load_model(path)
        assert model.hazard == InverseGaussianHazard(0.075, 3.0)
        assert model.stimulus == StimulusTerm(p=20, m=5, t0=4)


def test_flat_mapping_without_stimulus():
    model = parse_model({"family": "exponential", "rate": "4"})
    assert model.is_homogeneous
    assert model.hazard.rate == 4.0


@pytest.mark.parametrize(
    "spec",
    [
        {"hazard": {"mu": 1.0}},
        {"hazard": {"family": "invgauss", "mu": "fast", "sigma2": 1}},
        {"hazard": {"family": "exponential", "rate": 1}, "stimulus": {"p": 1, "m": 1}},
        {"hazard": {"family": "exponential", "rate": 1},
         "stimulus": {"p": 1, "m": 1, "t0": 0, "shape": 2}},
        {"hazard": {"family": "exponential", "speed": 1}},
    ],
)
def test_bad_model_specs(spec):
    with pytest.raises(ModelSpecError):
        parse_model(spec)


def test_invalid_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"hazard\": ")
    with pytest.raises(ModelSpecError):
        load_model(path)


def test_dump_is_sorted_json():
    spec = json.loads(dump_model(_driven_model()))
    assert spec["hazard"] == {"family": "invgauss", "mu": 0.075, "sigma2": 3.0}
    assert spec["stimulus"]["df"] == 5.0


def test_ig_hazard_matches_density_over_survivor():
    params = InverseGaussianHazard(0.075, 3.0)
    ref = stats.invgauss(0.075 * 3.0, scale=1.0 / 3.0)
    assert ig_hazard(0.075, params) == pytest.approx(ref.pdf(0.075) / ref.sf(0.075), rel=1e-9)


def test_ig_hazard_limits():
    params = InverseGaussianHazard(0.075, 3.0)
    assert ig_hazard(1e-4, params) < 1e-10
    assert ig_hazard(10.0, params) == pytest.approx(1 / (2 * 0.075**2 * 3.0), rel=1e-2)


@pytest.mark.parametrize("x", [0.0, -0.5, [0.1, 0.0]])
def test_ig_hazard_needs_positive_elapsed_time(x):
    with pytest.raises(ValueError):
        ig_hazard(x, InverseGaussianHazard(0.075, 3.0))


def test_stimulus_value_before_onset_and_at_the_mode():
    s = StimulusTerm(p=20, m=5, t0=4)
    assert stimulus_value(3.0, s) == 0.0
    assert stimulus_value(4.0, s) == 0.0
    assert stimulus_value(4.0 + 3 / 5, s) == pytest.approx(20 * stats.chi2.pdf(3.0, 5), rel=1e-12)


def test_driven_intensity_factorizes_into_hazard_and_stimulus():
    model = _driven_model()
    expected = ig_hazard(0.1, model.hazard) * math.exp(stimulus_value(4.6, model.stimulus))
    assert conditional_intensity(4.6, 4.5, model) == pytest.approx(expected, rel=1e-12)


def test_renewal_log_likelihood_is_a_sum_of_log_densities():
    hazard = InverseGaussianHazard(0.3, 1.5)
    train = SpikeTrain([0.2, 0.5, 1.1, 1.4, 2.3], 2.6)
    expected = hazard.log_density(train.intervals).sum() + hazard.log_survivor(0.3)
    assert log_likelihood(train, IntensityModel(hazard)) == pytest.approx(expected, rel=1e-9)

"""Maximum-likelihood fits of renewal interval models and the fit-then-test
workflow."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from errors import AnalysisError
from gof import Battery, run_battery
from intensity import IntensityModel, RenewalHazard, make_hazard, resolve_family
from rescale import time_transform
from simulate import RngStream
from trains import SpikeTrain

logger = logging.getLogger(__name__)

FITTED_MODEL_CAVEAT = (
    "model parameters were estimated from the tested train; the bands do not "
    "have exactly their nominal coverage"
)
_RESTARTS = 3
_SIMPLEX_XATOL = 1e-8
_SIMPLEX_MAXITER = 5000
# Below this μσ² the inverse-Gaussian fit is treated as zero dispersion.
_DEGENERATE_DISPERSION = 1e-12


class FitError(AnalysisError):
    """The data cannot support the requested fit or the optimizer failed."""


@dataclass
class FitResult:
    family: str
    params: dict[str, float]
    std_errors: dict[str, float]
    log_likelihood: float
    n: int
    censored: bool = False
    degenerate: bool = False
    method: str = "closed-form"
    notes: list[str] = field(default_factory=list)

    def as_tuple(self) -> tuple[float, ...]:
        return (*self.params.values(), self.log_likelihood)

    def hazard(self) -> RenewalHazard:
        if self.degenerate:
            raise FitError(f"the {self.family} fit is degenerate and has no usable model")
        return make_hazard(self.family, **self.params)

    def to_model(self) -> IntensityModel:
        return IntensityModel(self.hazard())

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("log_likelihood",):
            if not math.isfinite(data[key]):
                data[key] = None if math.isnan(data[key]) else str(data[key])
        data["std_errors"] = {
            k: (v if math.isfinite(v) else None) for k, v in self.std_errors.items()
        }
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_intervals(intervals, minimum: int) -> np.ndarray:
    x = np.asarray(intervals, dtype=float).ravel()
    if x.size < minimum:
        raise FitError(f"need at least {minimum} intervals, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise FitError("intervals must be finite and strictly positive")
    return x


def _check_gap(censored_gap: float | None) -> float:
    if censored_gap is None:
        return 0.0
    gap = float(censored_gap)
    if not math.isfinite(gap) or gap < 0:
        raise FitError(f"censored gap must be finite and non-negative, got {censored_gap!r}")
    return gap


def renewal_log_likelihood(hazard: RenewalHazard, intervals, censored_gap: float = 0.0) -> float:
    """Σ log f(x_i) plus log S(gap) for the censored stretch after the last event."""
    x = np.asarray(intervals, dtype=float)
    total = float(np.sum(hazard.log_density(x)))
    if censored_gap > 0:
        total += float(hazard.log_survivor(censored_gap))
    return total


def _standard_errors(
    family: str, params: dict[str, float], x: np.ndarray, gap: float
) -> dict[str, float]:
    """Inverse observed information from a central-difference Hessian."""
    names = list(params)
    theta = np.array([params[k] for k in names])
    steps = 1e-4 * np.abs(theta)

    def nll(values: np.ndarray) -> float:
        try:
            hazard = make_hazard(family, **dict(zip(names, values, strict=True)))
        except AnalysisError:
            return math.inf
        return -renewal_log_likelihood(hazard, x, gap)

    k = theta.size
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = steps[i]
            ej[j] = steps[j]
            value = (
                nll(theta + ei + ej) - nll(theta + ei - ej)
                - nll(theta - ei + ej) + nll(theta - ei - ej)
            ) / (4 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = value
    try:
        cov = np.linalg.inv(hess)
        variances = np.diag(cov)
    except np.linalg.LinAlgError:
        variances = np.full(k, np.nan)
    if not np.all(np.isfinite(variances)) or np.any(variances <= 0):
        logger.warning(f"Observed information for the {family} fit is not positive definite")
        return {name: math.nan for name in names}
    return {name: float(math.sqrt(v)) for name, v in zip(names, variances, strict=True)}


def _simplex(family: str, names: tuple[str, ...], starts, x: np.ndarray, gap: float):
    """Nelder-Mead on log-parameters from each start; best converged run wins."""

    def objective(log_theta: np.ndarray) -> float:
        if not np.all(np.isfinite(log_theta)) or np.any(np.abs(log_theta) > 700):
            return math.inf
        hazard = make_hazard(family, **dict(zip(names, np.exp(log_theta), strict=True)))
        value = -renewal_log_likelihood(hazard, x, gap)
        return value if math.isfinite(value) else math.inf

    best = None
    for start in starts:
        result = minimize(
            objective,
            np.log(np.asarray(start, dtype=float)),
            method="Nelder-Mead",
            options={
                "xatol": _SIMPLEX_XATOL,
                "fatol": 1e-8,
                "maxiter": _SIMPLEX_MAXITER,
                "maxfev": 2 * _SIMPLEX_MAXITER,
            },
        )
        logger.debug(
            f"{family} simplex from {start}: success={result.success}, nll={result.fun:.10g}"
        )
        if not (result.success and math.isfinite(result.fun)):
            continue
        if best is None or result.fun < best.fun:
            best = result
    if best is None:
        raise FitError(f"the {family} likelihood optimizer did not converge")
    return dict(zip(names, (float(v) for v in np.exp(best.x)), strict=True))


def fit_exponential(intervals, censored_gap: float | None = None) -> FitResult:
    x = _check_intervals(intervals, 1)
    gap = _check_gap(censored_gap)
    rate = x.size / (x.sum() + gap)
    params = {"rate": float(rate)}
    hazard = make_hazard("exponential", **params)
    return FitResult(
        family="exponential",
        params=params,
        std_errors={"rate": float(rate / math.sqrt(x.size))},
        log_likelihood=renewal_log_likelihood(hazard, x, gap),
        n=int(x.size),
        censored=gap > 0,
    )


def fit_invgauss(intervals, censored_gap: float | None = None) -> FitResult:
    """Inverse-Gaussian MLE: mu = mean, sigma2 = mean(1/x - 1/mean).

    With a censored gap the closed form starts a simplex refinement.
    """
    x = _check_intervals(intervals, 2)
    gap = _check_gap(censored_gap)
    mu = float(x.mean())
    sigma2 = float(np.mean(1.0 / x - 1.0 / mu))
    if mu * sigma2 <= _DEGENERATE_DISPERSION:
        logger.warning(f"Inverse-Gaussian fit is degenerate (sigma2={sigma2:.3g}); "
                       "intervals are (numerically) all equal")
        return FitResult(
            family="invgauss",
            params={"mu": mu, "sigma2": 0.0},
            std_errors={"mu": math.nan, "sigma2": math.nan},
            log_likelihood=math.inf,
            n=int(x.size),
            censored=gap > 0,
            degenerate=True,
            notes=["zero dispersion: all intervals equal"],
        )
    params = {"mu": mu, "sigma2": sigma2}
    method = "closed-form"
    if gap > 0:
        params = _simplex("invgauss", ("mu", "sigma2"), [(mu, sigma2)], x, gap)
        method = "nelder-mead"
    hazard = make_hazard("invgauss", **params)
    result = FitResult(
        family="invgauss",
        params=params,
        std_errors=_standard_errors("invgauss", params, x, gap),
        log_likelihood=renewal_log_likelihood(hazard, x, gap),
        n=int(x.size),
        censored=gap > 0,
        method=method,
    )
    logger.info(f"Fitted invgauss to {x.size} intervals: {params}")
    return result


def fit_loglogistic(intervals, censored_gap: float | None = None) -> FitResult:
    """Log-logistic MLE by Nelder-Mead on (log alpha, log beta)."""
    x = _check_intervals(intervals, 3)
    gap = _check_gap(censored_gap)
    logs = np.log(x)
    spread = float(logs.std())
    if spread <= 0:
        raise FitError("log-logistic fit is degenerate: all intervals are equal")
    alpha0 = float(np.exp(np.median(logs)))
    # The logistic law of log x has standard deviation pi / (sqrt(3) beta).
    beta0 = math.pi / (math.sqrt(3.0) * spread)
    starts = [(alpha0, beta0), (alpha0, 2.0 * beta0), (float(np.exp(logs.mean())), 0.5 * beta0)]
    params = _simplex("loglogistic", ("alpha", "beta"), starts[:_RESTARTS], x, gap)
    hazard = make_hazard("loglogistic", **params)
    result = FitResult(
        family="loglogistic",
        params=params,
        std_errors=_standard_errors("loglogistic", params, x, gap),
        log_likelihood=renewal_log_likelihood(hazard, x, gap),
        n=int(x.size),
        censored=gap > 0,
        method="nelder-mead",
    )
    logger.info(f"Fitted loglogistic to {x.size} intervals: {params}")
    return result


_FITTERS = {
    "invgauss": fit_invgauss,
    "loglogistic": fit_loglogistic,
    "exponential": fit_exponential,
}


def fit_renewal(intervals, family: str, censored_gap: float | None = None) -> FitResult:
    return _FITTERS[resolve_family(family)](intervals, censored_gap)


def fit_train(train: SpikeTrain, family: str, censored: bool = True) -> FitResult:
    """Fit the intervals of a train, with the gap to the horizon when `censored`."""
    if train.n < 2:
        raise FitError(f"need at least two events to fit intervals, got {train.n}")
    gap = train.censored_gap if censored else None
    return fit_renewal(train.intervals, family, gap or None)


def fitted_model_battery(
    train: SpikeTrain,
    family: str,
    level: float | None = None,
    censored: bool = True,
    fit: FitResult | None = None,
    n_perm: int | None = None,
    rng: RngStream | None = None,
) -> Battery:
    """Fit, transform with the fitted model, then run the five tests."""
    if train.n == 0:
        raise FitError("cannot fit an empty train")
    fit = fit_train(train, family, censored) if fit is None else fit
    tt = time_transform(train, fit.to_model())
    battery = run_battery(tt, level=level, n_perm=n_perm, rng=rng)
    battery.add_caveat(FITTED_MODEL_CAVEAT)
    return battery

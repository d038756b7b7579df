"""Renewal hazard families evaluated in log space.

Every family exposes the same surface (log density, log survivor, hazard,
cumulative hazard, sampling) and accepts scalars or numpy arrays of elapsed
times x > 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from errors import AnalysisError

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2 * math.pi)
_LN2 = math.log(2.0)


class ModelSpecError(AnalysisError):
    """A hazard or stimulus parameter set is invalid or cannot be read."""


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise ModelSpecError(f"{name} must be a finite positive number, got {value!r}")
    return value


def _log1mexp(r):
    """log(1 - exp(r)) for r < 0, accurate on both sides of -ln 2."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > -_LN2, np.log(-np.expm1(r)), np.log1p(-np.exp(r)))


def _scalar_or_array(x, out):
    return float(out.reshape(-1)[0]) if np.ndim(x) == 0 else out


class RenewalHazard:
    """Shared derived quantities; subclasses supply log_density and log_survivor."""

    family: str = ""

    def log_density(self, x):
        raise NotImplementedError

    def log_survivor(self, x):
        raise NotImplementedError

    def log_hazard(self, x):
        return self.log_density(x) - self.log_survivor(x)

    def hazard(self, x):
        return np.exp(self.log_hazard(x))

    def pdf(self, x):
        return np.exp(self.log_density(x))

    def cdf(self, x):
        return -np.expm1(self.log_survivor(x))

    def cumulative_hazard(self, x):
        """-log survivor, with the value 0 at x = 0."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(xs)
        mask = xs > 0
        if np.any(mask):
            out[mask] = -np.asarray(self.log_survivor(xs[mask]))
        return _scalar_or_array(x, out)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def time_scale(self) -> float:
        """Characteristic interval length, used to size thinning windows."""
        return self.mean

    @property
    def asymptote(self) -> float:
        """Limit of the hazard as x grows (0 when it decays)."""
        return 0.0

    @property
    def params(self) -> dict[str, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class InverseGaussianHazard(RenewalHazard):
    """Inverse-Gaussian intervals with mean mu and dispersion sigma2.

    f(x) = exp(-(x - mu)^2 / (2 x sigma2 mu^2)) / sqrt(2 pi x^3 sigma2);
    sigma2 is the reciprocal of the usual shape parameter.
    """

    mu: float
    sigma2: float
    family = "invgauss"

    def __post_init__(self):
        object.__setattr__(self, "mu", _positive("mu", self.mu))
        object.__setattr__(self, "sigma2", _positive("sigma2", self.sigma2))

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        mu, s2 = self.mu, self.sigma2
        return -0.5 * (_LOG_2PI + 3 * np.log(x) + math.log(s2)) - (x - mu) ** 2 / (
            2 * x * s2 * mu**2
        )

    def log_survivor(self, x):
        # 1 - F = Phi(-z1) - exp(2 / (mu sigma2)) Phi(-z2); both terms in log space
        # so the difference never cancels catastrophically in the upper tail.
        x = np.asarray(x, dtype=float)
        mu, s2 = self.mu, self.sigma2
        scale = mu * np.sqrt(s2 * x)
        first = log_ndtr(-(x - mu) / scale)
        second = 2.0 / (mu * s2) + log_ndtr(-(x + mu) / scale)
        gap = np.minimum(second - first, -np.finfo(float).tiny)
        return first + _log1mexp(gap)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.wald(self.mu, 1.0 / self.sigma2, size=n)

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def asymptote(self) -> float:
        return 1.0 / (2.0 * self.mu**2 * self.sigma2)

    @property
    def params(self) -> dict[str, float]:
        return {"mu": self.mu, "sigma2": self.sigma2}


@dataclass(frozen=True)
class LogLogisticHazard(RenewalHazard):
    """Log-logistic intervals: survivor 1 / (1 + (x/alpha)^beta)."""

    alpha: float
    beta: float
    family = "loglogistic"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "beta", _positive("beta", self.beta))

    def _log_ratio(self, x):
        return np.log(np.asarray(x, dtype=float) / self.alpha)

    def log_survivor(self, x):
        return -np.logaddexp(0.0, self.beta * self._log_ratio(x))

    def log_density(self, x):
        lr = self._log_ratio(x)
        return (
            math.log(self.beta / self.alpha)
            + (self.beta - 1) * lr
            - 2 * np.logaddexp(0.0, self.beta * lr)
        )

    def log_hazard(self, x):
        lr = self._log_ratio(x)
        return (
            math.log(self.beta / self.alpha)
            + (self.beta - 1) * lr
            - np.logaddexp(0.0, self.beta * lr)
        )

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        return self.alpha * np.exp(np.log(u / (1.0 - u)) / self.beta)

    @property
    def mean(self) -> float:
        if self.beta <= 1:
            return math.inf
        ratio = math.pi / self.beta
        return self.alpha * ratio / math.sin(ratio)

    @property
    def time_scale(self) -> float:
        return self.alpha

    @property
    def params(self) -> dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class ExponentialHazard(RenewalHazard):
    """Constant hazard: the homogeneous Poisson process."""

    rate: float
    family = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def log_density(self, x):
        return math.log(self.rate) - self.rate * np.asarray(x, dtype=float)

    def log_survivor(self, x):
        return -self.rate * np.asarray(x, dtype=float)

    def log_hazard(self, x):
        return np.full(np.shape(x), math.log(self.rate)) if np.ndim(x) else math.log(self.rate)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size=n)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def asymptote(self) -> float:
        return self.rate

    @property
    def params(self) -> dict[str, float]:
        return {"rate": self.rate}


FAMILIES: dict[str, type[RenewalHazard]] = {
    "invgauss": InverseGaussianHazard,
    "loglogistic": LogLogisticHazard,
    "exponential": ExponentialHazard,
}

_ALIASES = {
    "inverse-gaussian": "invgauss",
    "inversegaussian": "invgauss",
    "ig": "invgauss",
    "log-logistic": "loglogistic",
    "llogis": "loglogistic",
    "exp": "exponential",
    "poisson": "exponential",
}


def resolve_family(name: str) -> str:
    """Map a family name or alias to its canonical key."""
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in FAMILIES:
        known = ", ".join(sorted(FAMILIES))
        raise ModelSpecError(f"unknown hazard family {name!r} (known: {known})")
    return key


def make_hazard(family: str, **params: float) -> RenewalHazard:
    cls = FAMILIES[resolve_family(family)]
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except TypeError as e:
        raise ModelSpecError(f"bad parameters for {family}: {e}") from None
    except ValueError as e:
        raise ModelSpecError(f"bad parameter value for {family}: {e}") from None


def ig_hazard(x, params: InverseGaussianHazard):
    """h_IG(x) = f_IG(x) / (1 - F_IG(x)) for x > 0."""
    if np.any(np.asarray(x) <= 0):
        raise ValueError("the inverse-Gaussian hazard is defined for x > 0 only")
    return params.hazard(x)

"""First passage of a Wiener process through c(t) = a + b sqrt(t).

The first-passage density f solves the Volterra equation of the first kind

    G(t) = ∫_0^t K(t, s) f(s) ds,
    G(t) = 1 - Φ(c(t)/√t),  K(t, s) = 1 - Φ((c(t) - c(s))/√(t - s)),

discretized on a grid of step h with f piecewise constant per cell and the
kernel averaged exactly (to Gauss-Legendre precision) over each cell. The
two-sided band ±c(t) is given coverage 1 - 2P, P the one-sided probability.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import brentq
from scipy.special import ndtr

from config import config
from errors import AnalysisError

logger = logging.getLogger(__name__)

# Gauss-Legendre nodes per cell, in the variable u = sqrt(t - s).
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)
# Upper bound on kernel evaluations held in memory at once.
_BLOCK_EVALS = 2_000_000
_CALIBRATION_BRACKET = (1e-6, 10.0)
_CALIBRATION_TOL = 1e-5
# Offset used when a published pair is missing for a level.
DEFAULT_OFFSET = 0.3


class BoundaryError(AnalysisError):
    """Boundary or discretization parameters are unusable."""


class CalibrationError(AnalysisError):
    """No slope b reaches the requested crossing probability."""


@dataclass(frozen=True)
class BoundarySpec:
    """Square-root band a + b sqrt(t) with its targeted two-sided confidence."""

    a: float
    b: float
    level: float = 0.95
    step: float = field(default_factory=lambda: config.BOUNDARY_STEP)
    allow_zero_offset: bool = False

    def __post_init__(self):
        for name in ("a", "b", "level", "step"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise BoundaryError(f"boundary {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.a < 0:
            raise BoundaryError(f"boundary offset a must be non-negative, got {self.a!r}")
        if self.b <= 0:
            raise BoundaryError(f"boundary slope b must be positive, got {self.b!r}")
        if not 0 < self.level < 1:
            raise BoundaryError(f"confidence level must be in (0, 1), got {self.level!r}")
        if self.step <= 0:
            raise BoundaryError(f"integration step must be positive, got {self.step!r}")

    @property
    def alpha(self) -> float:
        return 1.0 - self.level

    def edge(self, t):
        return self.a + self.b * np.sqrt(t)


# Published coefficient pairs, keyed by two-sided confidence.
DEFAULT_BANDS: dict[float, BoundarySpec] = {
    0.95: BoundarySpec(0.299944595870772, 2.34797018726827, 0.95),
    0.99: BoundarySpec(0.313071417065285, 2.88963206734397, 0.99),
}


def _grid_size(t_max: float, step: float) -> int:
    if t_max <= 0:
        raise BoundaryError(f"t_max must be positive, got {t_max!r}")
    n = int(round(t_max / step))
    if n < 1 or abs(n * step - t_max) > 1e-9 * max(1.0, t_max):
        raise BoundaryError(f"step {step!r} does not divide t_max {t_max!r}")
    return n


def _kernel_block(b: float, h: float, rows: np.ndarray, columns: int) -> np.ndarray:
    """Cell averages (1/h) ∫_cell K(t_i, s) ds for grid rows i (1-based) and
    cells j = 1..columns; zero above the diagonal."""
    i = rows[:, None]
    d = i - np.arange(1, columns + 1)[None, :]
    lag = np.maximum(d, 0).astype(float)
    u_lo = np.sqrt(lag * h)
    u_hi = np.sqrt((lag + 1.0) * h)
    mid = 0.5 * (u_lo + u_hi)[..., None]
    half = 0.5 * (u_hi - u_lo)[..., None]
    u = mid + half * _GL_NODES
    t = (i * h)[..., None]
    s = np.maximum(t - u * u, 0.0)
    # c(t) - c(s) = b (t - s) / (√t + √s), so the offset a cancels.
    z = b * u / (np.sqrt(t) + np.sqrt(s))
    cell = (half * _GL_WEIGHTS * 2.0 * u * ndtr(-z)).sum(axis=-1) / h
    return np.where(d >= 0, cell, 0.0)


def _crossing_mass(spec: BoundarySpec, t_max: float, n: int) -> float:
    h = t_max / n
    t = h * np.arange(1, n + 1)
    rhs = ndtr(-spec.edge(t) / np.sqrt(t))
    mass = np.zeros(n)
    block = max(1, _BLOCK_EVALS // (len(_GL_NODES) * n))
    for r0 in range(0, n, block):
        r1 = min(n, r0 + block)
        weights = _kernel_block(spec.b, h, np.arange(r0 + 1, r1 + 1), r1)
        local = rhs[r0:r1] - weights[:, :r0] @ mass[:r0]
        mass[r0:r1] = solve_triangular(weights[:, r0:r1], local, lower=True)
    return float(min(max(mass.sum(), 0.0), 1.0))


def first_passage_cdf(
    spec: BoundarySpec,
    t_max: float = 1.0,
    step: float | None = None,
    error_bound: bool = True,
) -> tuple[float, float]:
    """P(W crosses a + b sqrt(t) before t_max) and an error bound.

    The bound is the change in the probability when the step is doubled.
    """
    step = spec.step if step is None else step
    if spec.a == 0:
        if not spec.allow_zero_offset:
            raise BoundaryError("boundary offset a = 0 puts the path on the boundary at t = 0")
        return 1.0, 0.0
    n = _grid_size(t_max, step)
    prob = _crossing_mass(spec, t_max, n)
    err = 0.0
    if error_bound:
        if n < 2:
            raise BoundaryError("the error bound needs at least two integration steps")
        err = abs(prob - _crossing_mass(spec, t_max, n // 2))
    logger.debug(
        f"first passage a={spec.a:.15g} b={spec.b:.15g} t_max={t_max:g} "
        f"h={step:g}: P={prob:.10g} (err {err:.2g})"
    )
    return prob, err


def verify_band(spec: BoundarySpec, t_max: float = 1.0) -> tuple[float, float]:
    """Two-sided coverage interval [1 - 2(P + err), 1 - 2(P - err)]."""
    if spec.step > 0.01:
        raise BoundaryError(f"verification needs a step of at most 0.01, got {spec.step!r}")
    prob, err = first_passage_cdf(spec, t_max)
    low = min(max(1.0 - 2.0 * (prob + err), 0.0), 1.0)
    high = min(max(1.0 - 2.0 * (prob - err), 0.0), 1.0)
    logger.info(f"Band a={spec.a:.15g} b={spec.b:.15g}: coverage in [{low:.6f}, {high:.6f}]")
    return low, high


def calibrate_band(
    alpha: float,
    a_fixed: float = DEFAULT_OFFSET,
    step: float | None = None,
    t_max: float = 1.0,
) -> BoundarySpec:
    """Solve for b so the one-sided crossing probability by t_max is alpha/2.

    Coverage falls monotonically in b, so a bracketing root finder converges.
    """
    if not 0 < alpha <= 0.5:
        raise BoundaryError(f"alpha must be in (0, 0.5], got {alpha!r}")
    if not (math.isfinite(a_fixed) and a_fixed > 0):
        raise BoundaryError(f"the fixed offset must be positive, got {a_fixed!r}")
    step = config.BOUNDARY_STEP if step is None else step
    target = alpha / 2
    n = _grid_size(t_max, step)

    def excess(b: float) -> float:
        return _crossing_mass(BoundarySpec(a_fixed, b, 1.0 - alpha, step), t_max, n) - target

    lo, hi = _CALIBRATION_BRACKET
    f_lo, f_hi = excess(lo), excess(hi)
    if not (f_lo > 0 > f_hi):
        raise CalibrationError(
            f"no b in [{lo:g}, {hi:g}] gives crossing probability {target:g} with a={a_fixed:g} "
            f"(range {f_lo + target:.4g} .. {f_hi + target:.4g})"
        )
    b, result = brentq(excess, lo, hi, xtol=1e-12, full_output=True)
    logger.debug(f"calibration converged in {result.iterations} iterations")
    miss = abs(excess(b))
    if miss > _CALIBRATION_TOL:
        raise CalibrationError(f"calibrated b={b:.15g} misses the target by {miss:.2g}")
    logger.info(f"Calibrated band for alpha={alpha:g}: a={a_fixed:.15g}, b={b:.15g}")
    return BoundarySpec(a_fixed, float(b), 1.0 - alpha, step)


@lru_cache(maxsize=32)
def _calibrated(alpha: float, step: float) -> BoundarySpec:
    return calibrate_band(alpha, DEFAULT_OFFSET, step)


def band_for_level(alpha: float, step: float | None = None) -> BoundarySpec:
    """The published band for significance 0.05 or 0.01, a calibrated one otherwise."""
    confidence = 1.0 - alpha
    for known, spec in DEFAULT_BANDS.items():
        if math.isclose(known, confidence, abs_tol=1e-12):
            return spec
    return _calibrated(float(alpha), config.BOUNDARY_STEP if step is None else float(step))


def _path_crossings(
    spec: BoundarySpec, n_paths: int, n_steps: int, gen: np.random.Generator, t_max: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-path crossing probabilities (upper only, either side) given the grid
    values, using the Brownian-bridge chance of crossing between grid points."""
    dt = t_max / n_steps
    t = dt * np.arange(0, n_steps + 1)
    edge = spec.edge(t)
    upper = np.empty(n_paths)
    either = np.empty(n_paths)
    chunk = max(1, _BLOCK_EVALS // n_steps)
    for p0 in range(0, n_paths, chunk):
        rows = min(chunk, n_paths - p0)
        w = np.zeros((rows, n_steps + 1))
        w[:, 1:] = np.cumsum(gen.standard_normal((rows, n_steps)) * math.sqrt(dt), axis=1)
        log_stay = []
        for gap in (edge - w, edge + w):
            g0, g1 = gap[:, :-1], gap[:, 1:]
            inside = (g0 > 0) & (g1 > 0)
            with np.errstate(over="ignore", invalid="ignore"):
                bridge = np.where(inside, np.exp(-2.0 * g0 * g1 / dt), 1.0)
            with np.errstate(divide="ignore"):
                log_stay.append(np.log1p(-np.minimum(bridge, 1.0)).sum(axis=1))
        upper[p0:p0 + rows] = -np.expm1(log_stay[0])
        either[p0:p0 + rows] = -np.expm1(log_stay[0] + log_stay[1])
    return upper, either


def monte_carlo_crossing(
    spec: BoundarySpec,
    n_paths: int,
    n_steps: int,
    rng,
    two_sided: bool = False,
    t_max: float = 1.0,
) -> tuple[float, float]:
    """Monte Carlo crossing probability by t_max and its standard error."""
    if n_paths < 2 or n_steps < 1:
        raise ValueError("need at least two paths and one step")
    if spec.a == 0:
        if not spec.allow_zero_offset:
            raise BoundaryError("boundary offset a = 0 puts the path on the boundary at t = 0")
        return 1.0, 0.0
    upper, either = _path_crossings(spec, n_paths, n_steps, rng.generator(), t_max)
    values = either if two_sided else upper
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_paths))


def double_crossing_gap(
    spec: BoundarySpec, n_paths: int, n_steps: int, rng, t_max: float = 1.0
) -> tuple[float, float]:
    """2 P(upper) - P(either side) on common paths: the mass that the
    symmetric shortcut 1 - 2P counts twice. Returns (estimate, standard error)."""
    upper, either = _path_crossings(spec, n_paths, n_steps, rng.generator(), t_max)
    gap = 2.0 * upper - either
    return float(gap.mean()), float(gap.std(ddof=1) / math.sqrt(n_paths))

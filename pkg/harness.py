"""Monte Carlo coverage and joint-rejection studies on unit-exponential samples."""
from __future__ import annotations

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import binom
from tqdm import tqdm

from boundary import DEFAULT_BANDS, BoundarySpec, band_for_level
from config import config
from gof import berman_values, ks_pvalue, ks_uniform_statistic, uniform_points
from simulate import RngStream, sample_unit_exponentials
from trains import TransformedTrain

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (10, 20, 50, 100, 200, 300, 500, 700, 900)
# Stream ids are size_index * STREAM_STRIDE + replicate.
STREAM_STRIDE = 2**32
MIN_COVERAGE_REPLICATES = 100
MIN_JOINT_REPLICATES = 1000

PAIRS = (("berman", "uniform"), ("wiener", "berman"), ("wiener", "uniform"))
TESTED = ("uniform", "berman", "wiener")


@dataclass(frozen=True)
class CoverageRow:
    n: int
    replicates: int
    level: float
    pass_count: int
    empirical: float
    band_low: float
    band_high: float

    @property
    def binomial_band(self) -> tuple[float, float]:
        return self.band_low, self.band_high

    @property
    def inside_band(self) -> bool:
        return self.band_low <= self.empirical <= self.band_high


@dataclass(frozen=True)
class JointRow:
    """Replicates rejected by both tests of a pair, with the band expected
    under independence.

    The "union" row counts replicates rejected by any of the three tests;
    its first and second counts are the uniform and Berman rejections.
    """

    n: int
    replicates: int
    level: float
    pair: str
    joint_count: int
    first_count: int
    second_count: int
    band_low: int
    band_high: int


def binomial_band(replicates: int, p: float, confidence: float = 0.95) -> tuple[float, float]:
    """Central binomial interval for a count, in counts."""
    tail = (1.0 - confidence) / 2
    low, high = binom.ppf([tail, 1.0 - tail], replicates, p)
    return float(low), float(high)


def _stream(seed: int, size_index: int, replicate: int) -> RngStream:
    return RngStream(seed, size_index * STREAM_STRIDE + replicate)


def _unit_sample(seed: int, size_index: int, replicate: int, n: int) -> TransformedTrain:
    return TransformedTrain.from_intervals(
        sample_unit_exponentials(n, _stream(seed, size_index, replicate))
    )


def _wiener_passes(intervals: np.ndarray, band: BoundarySpec) -> bool:
    n = intervals.size
    values = np.cumsum(intervals - 1.0) / np.sqrt(n)
    return bool(np.all(np.abs(values) < band.edge(np.arange(1, n + 1) / n)))


def _check_sizes(sizes: Sequence[int], minimum: int, what: str) -> None:
    if len(sizes) == 0:
        raise ValueError("at least one sample size is required")
    if any(n < minimum for n in sizes):
        raise ValueError(what)


def _blocks(replicates: int, workers: int) -> list[range]:
    step = -(-replicates // workers)
    return [range(start, min(start + step, replicates)) for start in range(0, replicates, step)]


def _run_replicates(
    sizes: Sequence[int],
    replicates: int,
    work: Callable[[int, int, range], np.ndarray],
    threads: int | None,
    progress: bool,
    label: str,
) -> list[np.ndarray]:
    """Run work over blocks of replicates for every size; one stacked array
    of per-replicate results per size, in replicate order."""
    threads = config.THREADS if threads is None else threads
    workers = threads or os.cpu_count() or 1
    jobs = [
        (size_index, n, block)
        for size_index, n in enumerate(sizes)
        for block in _blocks(replicates, workers)
    ]
    with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        results = pool.map(lambda job: work(*job), jobs)
        done = list(tqdm(results, total=len(jobs), desc=label, disable=not progress))
    per_size: list[list[np.ndarray]] = [[] for _ in sizes]
    for (size_index, _, _), result in zip(jobs, done, strict=True):
        per_size[size_index].append(result)
    return [np.concatenate(chunks) for chunks in per_size]


def coverage_experiment(
    sizes: Sequence[int] = DEFAULT_SIZES,
    replicates: int = 10_000,
    bands: Sequence[BoundarySpec] | None = None,
    seed: int | None = None,
    threads: int | None = None,
    band_confidence: float = 0.95,
    progress: bool = False,
) -> list[CoverageRow]:
    """Fraction of unit-exponential samples whose Wiener path stays inside
    each band, per sample size."""
    if replicates < MIN_COVERAGE_REPLICATES:
        raise ValueError(f"replicates must be at least {MIN_COVERAGE_REPLICATES}")
    _check_sizes(sizes, 1, "sample sizes must be positive")
    bands = list(DEFAULT_BANDS.values()) if bands is None else list(bands)
    seed = config.DEFAULT_SEED if seed is None else seed

    def work(size_index: int, n: int, block: range) -> np.ndarray:
        passed = np.zeros((len(block), len(bands)), dtype=bool)
        for i, r in enumerate(block):
            intervals = _unit_sample(seed, size_index, r, n).intervals
            passed[i] = [_wiener_passes(intervals, band) for band in bands]
        return passed

    rows: list[CoverageRow] = []
    flags = _run_replicates(sizes, replicates, work, threads, progress, "coverage")
    for n, passed in zip(sizes, flags, strict=True):
        counts = passed.sum(axis=0)
        for band, count in zip(bands, counts, strict=True):
            low, high = binomial_band(replicates, band.level, band_confidence)
            rows.append(CoverageRow(
                n=n,
                replicates=replicates,
                level=band.level,
                pass_count=int(count),
                empirical=int(count) / replicates,
                band_low=low / replicates,
                band_high=high / replicates,
            ))
        logger.debug(f"coverage n={n}: {(counts / replicates).tolist()}")
    logger.info(
        f"Coverage study: {len(sizes)} sizes x {replicates} replicates x {len(bands)} bands"
    )
    return rows


def joint_rejection_experiment(
    sizes: Sequence[int] = (100,),
    replicates: int = 10_000,
    level: float = 0.05,
    seed: int | None = None,
    threads: int | None = None,
    band_confidence: float = 0.95,
    progress: bool = False,
) -> list[JointRow]:
    """Count replicates rejected by both tests of each pair, and by any of
    the uniform, Berman and Wiener tests."""
    if replicates < MIN_JOINT_REPLICATES:
        raise ValueError(f"replicates must be at least {MIN_JOINT_REPLICATES}")
    _check_sizes(sizes, 2, "joint rejection needs samples of at least 2 intervals")
    band = band_for_level(level)
    seed = config.DEFAULT_SEED if seed is None else seed

    def work(size_index: int, n: int, block: range) -> np.ndarray:
        # columns follow TESTED
        rejects = np.zeros((len(block), len(TESTED)), dtype=bool)
        for i, r in enumerate(block):
            tt = _unit_sample(seed, size_index, r, n)
            points = uniform_points(tt)
            u = berman_values(tt)
            rejects[i] = (
                ks_pvalue(points.size, ks_uniform_statistic(points)) < level,
                ks_pvalue(u.size, ks_uniform_statistic(u)) < level,
                not _wiener_passes(tt.intervals, band),
            )
        return rejects

    low, high = binomial_band(replicates, level**2, band_confidence)
    u_low, u_high = binomial_band(replicates, 1.0 - (1.0 - level) ** 3, band_confidence)
    rows: list[JointRow] = []
    flags = _run_replicates(sizes, replicates, work, threads, progress, "joint")
    for n, matrix in zip(sizes, flags, strict=True):
        rejects = dict(zip(TESTED, matrix.T, strict=True))
        for first, second in PAIRS:
            rows.append(JointRow(
                n=n,
                replicates=replicates,
                level=level,
                pair=f"{first}x{second}",
                joint_count=int(np.count_nonzero(rejects[first] & rejects[second])),
                first_count=int(rejects[first].sum()),
                second_count=int(rejects[second].sum()),
                band_low=int(low),
                band_high=int(high),
            ))
        rows.append(JointRow(
            n=n,
            replicates=replicates,
            level=level,
            pair="union",
            joint_count=int(matrix.any(axis=1).sum()),
            first_count=int(rejects["uniform"].sum()),
            second_count=int(rejects["berman"].sum()),
            band_low=int(u_low),
            band_high=int(u_high),
        ))
    logger.info(f"Joint rejection study: {len(sizes)} sizes x {replicates} replicates at {level:g}")
    return rows


def rows_to_frame(rows: Sequence[CoverageRow | JointRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows])


def write_table(rows: Sequence[CoverageRow | JointRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_to_frame(rows).to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path

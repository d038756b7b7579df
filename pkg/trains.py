"""Event-time containers, validation, and the plain-text spike file format.

A spike file holds one ASCII decimal per line. Blank lines and `#` comments
are ignored, except for two header comments: `# horizon=<T>` sets the
observation end and `# scale=lambda` (with `# total=<Λ(T)>`) marks a
time-transformed train.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from errors import AnalysisError

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every IEEE double.
_REPR = "{:.17g}"
_HEADER = re.compile(r"^#\s*(\w+)\s*=\s*(\S+)\s*$")


class TrainFormatError(AnalysisError):
    """A spike file line could not be read as a valid event time."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class TrainValueError(AnalysisError):
    """Event times or horizon violate the train invariants."""


def _as_times(values) -> np.ndarray:
    times = np.array(values, dtype=float).ravel()
    times.setflags(write=False)
    return times


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Strictly increasing event times on the observation window (0, horizon]."""

    times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = _as_times(self.times)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", float(self.horizon))
        if not np.all(np.isfinite(times)) or not np.isfinite(self.horizon):
            raise TrainValueError("event times and horizon must be finite")
        if times.size and times[0] <= 0:
            raise TrainValueError(f"event time {times[0]!r} is not positive")
        if times.size > 1:
            bad = np.flatnonzero(np.diff(times) <= 0)
            if bad.size:
                i = int(bad[0]) + 1
                raise TrainValueError(
                    f"event {i + 1} ({times[i]!r}) does not follow {times[i - 1]!r}"
                )
        if self.horizon < 0 or (times.size and times[-1] > self.horizon):
            raise TrainValueError(
                f"horizon {self.horizon!r} must be at least the last event time"
            )

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def intervals(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def censored_gap(self) -> float:
        """Time from the last event to the horizon (not an observed interval)."""
        return self.horizon - float(self.times[-1]) if self.n else self.horizon

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True, eq=False)
class TransformedTrain:
    """Mapped event times Λ_1 < ... < Λ_n plus Λ at the horizon.

    lambdas[0] is the origin of the transformed axis (the first event), so a
    train of n mapped times carries n - 1 unit-rate increments.
    """

    lambdas: np.ndarray
    total: float

    def __post_init__(self):
        lambdas = _as_times(self.lambdas)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "total", float(self.total))
        if lambdas.size > 1 and np.any(np.diff(lambdas) <= 0):
            raise TrainValueError("transformed times must be strictly increasing")
        if lambdas.size and lambdas[-1] > self.total:
            raise TrainValueError("transformed total must be at least the last mapped time")

    @classmethod
    def from_intervals(cls, intervals) -> TransformedTrain:
        """Build a transformed train starting at 0 from unit-rate increments."""
        lambdas = np.concatenate(([0.0], np.cumsum(np.asarray(intervals, dtype=float))))
        return cls(lambdas, float(lambdas[-1]))

    @property
    def n(self) -> int:
        return int(self.lambdas.size)

    @property
    def origin(self) -> float:
        return float(self.lambdas[0])

    @property
    def intervals(self) -> np.ndarray:
        return np.diff(self.lambdas)

    @property
    def tail(self) -> float:
        """Censored transformed duration after the last mapped event."""
        return self.total - float(self.lambdas[-1])


def _parse_lines(text: str, positive: bool) -> tuple[list[float], dict[str, str]]:
    values: list[float] = []
    headers: dict[str, str] = {}
    previous: float | None = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _HEADER.match(line)
            if match:
                headers[match.group(1).lower()] = match.group(2)
            continue
        try:
            value = float(line)
        except ValueError:
            raise TrainFormatError(f"cannot read {line!r} as an event time", number) from None
        if not np.isfinite(value):
            raise TrainFormatError(f"event time {line!r} is not finite", number)
        if positive and value <= 0:
            raise TrainFormatError(f"event time {line!r} is not positive", number)
        if previous is not None and value <= previous:
            kind = "tie" if value == previous else "non-monotone time"
            raise TrainFormatError(
                f"{kind}: {value!r} after {previous!r} (strict increase required)", number
            )
        values.append(value)
        previous = value
    return values, headers


def _header_float(headers: dict[str, str], key: str) -> float | None:
    if key not in headers:
        return None
    try:
        return float(headers[key])
    except ValueError:
        raise TrainFormatError(f"header {key}={headers[key]!r} is not a number") from None


def parse_train(text: str, horizon: float | None = None) -> SpikeTrain:
    """Parse one event time per line into a validated SpikeTrain.

    The horizon is, in order of precedence: the argument, the `# horizon=`
    header, the last event time.
    """
    values, headers = _parse_lines(text, positive=True)
    if not values:
        raise TrainFormatError("no event times found")
    if horizon is None:
        horizon = _header_float(headers, "horizon")
    if horizon is None:
        horizon = values[-1]
    train = SpikeTrain(values, horizon)
    logger.debug(f"Parsed {train.n} events on (0, {train.horizon}]")
    return train


def serialize_train(train: SpikeTrain) -> str:
    lines = [f"# horizon={_REPR.format(train.horizon)}"]
    lines.extend(_REPR.format(t) for t in train.times)
    return "\n".join(lines) + "\n"


def parse_transformed(text: str) -> TransformedTrain:
    values, headers = _parse_lines(text, positive=False)
    if headers.get("scale") != "lambda":
        raise TrainFormatError("missing '# scale=lambda' header")
    if not values:
        raise TrainFormatError("no transformed times found")
    total = _header_float(headers, "total")
    return TransformedTrain(values, values[-1] if total is None else total)


def serialize_transformed(tt: TransformedTrain) -> str:
    lines = ["# scale=lambda", f"# total={_REPR.format(tt.total)}"]
    lines.extend(_REPR.format(x) for x in tt.lambdas)
    return "\n".join(lines) + "\n"


def read_train(path: str | Path, horizon: float | None = None) -> SpikeTrain:
    return parse_train(Path(path).read_text(encoding="ascii"), horizon)


def write_train(path: str | Path, train: SpikeTrain) -> Path:
    path = Path(path)
    path.write_text(serialize_train(train), encoding="ascii")
    return path


def counting_path(train: SpikeTrain, t: float) -> int:
    """N(t): number of events in (0, t], right-continuous."""
    if not 0 <= t <= train.horizon:
        raise TrainValueError(f"t={t!r} is outside [0, {train.horizon!r}]")
    return int(np.searchsorted(train.times, t, side="right"))

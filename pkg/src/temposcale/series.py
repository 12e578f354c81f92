"""Uniform time-series containers, Z-score normalization, and windowing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SeriesTooShortError, ZeroVarianceError


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar series.

    ``values[i]`` is the sample at ``start_time + i * interval`` (seconds).
    """

    start_time: float
    interval: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if not self.interval > 0:
            raise ValueError("interval must be positive")
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + self.interval * np.arange(len(self), dtype=np.float64)

    @property
    def end_time(self) -> float:
        """Time of the sample that would follow the last one."""
        return float(self.start_time + self.interval * len(self))

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        """Same clock, different samples.  Length may change."""
        return TimeSeries(self.start_time, self.interval, values)


@dataclass(frozen=True)
class NormalizationStats:
    """Mean and population standard deviation of a reference series."""

    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("std must be positive")

    @classmethod
    def identity(cls) -> "NormalizationStats":
        return cls(mean=0.0, std=1.0)


def zscore_normalize(series: TimeSeries) -> tuple[TimeSeries, NormalizationStats]:
    """Normalize to zero mean and unit population standard deviation.

    Uses the 1/n variance form.  A constant series is rejected because its
    spread cannot be rescaled.
    """
    if len(series) < 2:
        raise SeriesTooShortError("need at least 2 points to normalize")
    vals = series.values
    mean = float(np.mean(vals))
    std = float(np.sqrt(np.mean((vals - mean) ** 2)))
    if std == 0.0:
        raise ZeroVarianceError("series is constant; z-score is undefined")
    stats = NormalizationStats(mean=mean, std=std)
    return series.with_values((vals - mean) / std), stats


def inverse_normalize(series: TimeSeries, stats: NormalizationStats) -> TimeSeries:
    """Undo :func:`zscore_normalize` using the recorded stats."""
    return series.with_values(series.values * stats.std + stats.mean)


def inverse_normalize_values(values: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    """Array form of :func:`inverse_normalize` for forecast vectors."""
    return np.asarray(values, dtype=np.float64) * stats.std + stats.mean


@dataclass(frozen=True)
class WindowBatch:
    """Aligned (history, future) training pairs cut from one series.

    Every history has ``history_len`` points and is immediately followed by
    its ``horizon_len``-point future; pairs never read past the end of the
    source series.
    """

    history_len: int
    horizon_len: int
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        for hist, fut in self.pairs:
            if hist.shape != (self.history_len,) or fut.shape != (self.horizon_len,):
                raise ValueError("window pair has wrong shape")

    def __len__(self) -> int:
        return len(self.pairs)

    def histories(self) -> np.ndarray:
        """All histories stacked into an [n, history_len] matrix."""
        return np.stack([h for h, _ in self.pairs])

    def futures(self) -> np.ndarray:
        """All futures stacked into an [n, horizon_len] matrix."""
        return np.stack([f for _, f in self.pairs])


def make_windows(
    series: TimeSeries, history_len: int, horizon_len: int, stride: int
) -> WindowBatch:
    """Slide a (history, future) window over the series.

    Yields ``floor((len - history_len - horizon_len) / stride) + 1`` pairs;
    the series must be long enough for at least one.
    """
    if history_len < 1 or horizon_len < 1 or stride < 1:
        raise ValueError("history_len, horizon_len, and stride must be >= 1")
    total = history_len + horizon_len
    n = len(series)
    if n < total:
        raise SeriesTooShortError(
            f"need at least {total} points for one window, got {n}"
        )
    vals = series.values
    pairs = []
    for start in range(0, n - total + 1, stride):
        hist = vals[start : start + history_len].copy()
        fut = vals[start + history_len : start + total].copy()
        pairs.append((hist, fut))
    return WindowBatch(history_len, horizon_len, tuple(pairs))

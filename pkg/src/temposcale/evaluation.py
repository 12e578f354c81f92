"""Forecast quality metrics and the per-horizon degradation study."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .errors import DataError
from .forecasters import make_forecaster
from .parallel import map_ordered
from .series import TimeSeries, make_windows

# fraction of points that must have nonzero actuals for MAPE to be reported
MAPE_MIN_NONZERO = 0.95

MAPE_TOO_MANY_ZEROS = "more than 5% of actual values are zero"
R2_CONSTANT_ACTUAL = "actual series is constant"


@dataclass(frozen=True)
class PerStepMetrics:
    """Metric value per forecast step; NaN marks undefined entries."""

    mse: np.ndarray
    mape: np.ndarray
    r2: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    """Aggregate forecast errors; absent metrics carry their reason."""

    mse: float
    mape: float | None
    r2: float | None
    n: int
    mape_excluded: int = 0
    mape_reason: str | None = None
    r2_reason: str | None = None
    per_step: PerStepMetrics | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one sample")
        if self.mse < 0:
            raise ValueError("mse must be non-negative")
        if self.mape is not None and self.mape < 0:
            raise ValueError("mape must be non-negative")
        if self.r2 is not None and self.r2 > 1.0 + 1e-12:
            raise ValueError("r2 cannot exceed 1")


def _mape(actual: np.ndarray, predicted: np.ndarray) -> tuple[float | None, int, str | None]:
    nonzero = actual != 0.0
    excluded = int(np.size(actual) - np.count_nonzero(nonzero))
    if np.count_nonzero(nonzero) < MAPE_MIN_NONZERO * np.size(actual):
        return None, excluded, MAPE_TOO_MANY_ZEROS
    ratio = np.abs(actual[nonzero] - predicted[nonzero]) / np.abs(actual[nonzero])
    return float(np.mean(ratio) * 100.0), excluded, None


def _r2(actual: np.ndarray, predicted: np.ndarray) -> tuple[float | None, str | None]:
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot == 0.0:
        return None, R2_CONSTANT_ACTUAL
    ss_res = float(np.sum((actual - predicted) ** 2))
    return 1.0 - ss_res / ss_tot, None


def evaluate(actual, predicted) -> EvalReport:
    """Mean squared error, mean absolute percentage error, and R².

    Accepts 1-D paired series or 2-D [windows, steps] arrays; the 2-D form
    also reports per-step metrics.  Points with zero actuals are excluded
    from MAPE (and counted) as long as at least 95% are nonzero; otherwise
    MAPE is absent with a reason, as is R² for a constant actual.
    """
    a = actual.values if isinstance(actual, TimeSeries) else np.asarray(actual, float)
    p = predicted.values if isinstance(predicted, TimeSeries) else np.asarray(predicted, float)
    if a.shape != p.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValueError("empty series")
    if a.ndim > 2:
        raise ValueError("expected 1-D or 2-D inputs")

    flat_a, flat_p = a.reshape(-1), p.reshape(-1)
    mse = float(np.mean((flat_a - flat_p) ** 2))
    mape, excluded, mape_reason = _mape(flat_a, flat_p)
    r2, r2_reason = _r2(flat_a, flat_p)

    per_step = None
    if a.ndim == 2:
        steps = a.shape[1]
        step_mse = np.empty(steps)
        step_mape = np.empty(steps)
        step_r2 = np.empty(steps)
        for j in range(steps):
            step_mse[j] = np.mean((a[:, j] - p[:, j]) ** 2)
            m, _, m_reason = _mape(a[:, j], p[:, j])
            step_mape[j] = np.nan if m_reason else m
            r, r_reason = _r2(a[:, j], p[:, j])
            step_r2[j] = np.nan if r_reason else r
        per_step = PerStepMetrics(mse=step_mse, mape=step_mape, r2=step_r2)

    return EvalReport(
        mse=mse,
        mape=mape,
        r2=r2,
        n=int(flat_a.size),
        mape_excluded=excluded,
        mape_reason=mape_reason,
        r2_reason=r2_reason,
        per_step=per_step,
    )


TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class StudyCell:
    """Mean metrics for one (model, history:future) pair."""

    history_len: int
    horizon_len: int
    model: str
    mse: float
    mape: float | None
    r2: float | None
    repetitions: int


@dataclass(frozen=True)
class StudyResult:
    cells: tuple[StudyCell, ...]
    model_names: tuple[str, ...]
    horizons: tuple[tuple[int, int], ...]

    def cell(self, model: str, history_len: int, horizon_len: int) -> StudyCell:
        for c in self.cells:
            if (c.model, c.history_len, c.horizon_len) == (model, history_len, horizon_len):
                return c
        raise KeyError((model, history_len, horizon_len))


def _chronological_split(series: TimeSeries) -> tuple[TimeSeries, int]:
    split = int(len(series) * TRAIN_FRACTION)
    train = TimeSeries(series.start_time, series.interval, series.values[:split])
    return train, split


def _cell_seed(base: int, model_idx: int, horizon_idx: int, rep: int) -> int:
    return int(
        np.random.SeedSequence([base, model_idx, horizon_idx, rep]).generate_state(1)[0]
    )


def _run_cell(
    name: str,
    series: TimeSeries,
    history_len: int,
    horizon_len: int,
    config: RunConfig,
    seeds: list[int],
) -> StudyCell:
    train, split = _chronological_split(series)
    if len(train) < history_len + horizon_len:
        raise DataError(
            f"train split too short for history {history_len} + horizon {horizon_len}"
        )
    # test histories may reach back into the train tail; every target point
    # lies strictly inside the held-out segment
    test_segment = TimeSeries(0.0, series.interval, series.values[split - history_len :])
    test_windows = make_windows(
        test_segment, history_len, horizon_len, config.window_stride
    )

    cell_config = replace(
        config,
        history_len=history_len,
        horizon_len=horizon_len,
        label_len=min(config.label_len, history_len),
    )
    mses, mapes, r2s = [], [], []
    for seed in seeds:
        forecaster = make_forecaster(name)
        forecaster.fit(train, cell_config, seed)
        predicted = np.stack([forecaster.forecast(h) for h, _ in test_windows.pairs])
        actual = test_windows.futures()
        report = evaluate(actual, predicted)
        mses.append(report.mse)
        mapes.append(report.mape)
        r2s.append(report.r2)

    def mean_or_none(values):
        if any(v is None for v in values):
            return None
        return float(np.mean(values))

    return StudyCell(
        history_len=history_len,
        horizon_len=horizon_len,
        model=name,
        mse=float(np.mean(mses)),
        mape=mean_or_none(mapes),
        r2=mean_or_none(r2s),
        repetitions=len(seeds),
    )


def horizon_study(
    model_names: list[str],
    series: TimeSeries,
    horizons: list[tuple[int, int]],
    config: RunConfig | None = None,
    repetitions: int = 3,
    base_seed: int = 0,
) -> StudyResult:
    """Train and score each model at each (history, horizon) shape.

    The split is chronological (first 80% train), identical for every
    model; each (model, horizon, repetition) cell gets its own derived
    seed, so cells are independent and the study is reproducible.
    """
    if config is None:
        config = RunConfig()
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not model_names or not horizons:
        raise ValueError("need at least one model and one horizon")

    tasks = []
    for m_idx, name in enumerate(model_names):
        for h_idx, (hist, hor) in enumerate(horizons):
            seeds = [_cell_seed(base_seed, m_idx, h_idx, rep) for rep in range(repetitions)]
            tasks.append((name, hist, hor, seeds))
    cells = map_ordered(
        lambda task: _run_cell(task[0], series, task[1], task[2], config, task[3]),
        tasks,
    )
    return StudyResult(
        cells=tuple(cells),
        model_names=tuple(model_names),
        horizons=tuple((h, f) for h, f in horizons),
    )

"""Comparison forecasters: least-squares AR with differencing, and naive
persistence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SeriesTooShortError
from .forecast import ForecastVector
from .series import TimeSeries


@dataclass(frozen=True)
class ArModel:
    """AR(p) on the d-times-differenced series, fit by ordinary least
    squares; ``coefficients[i]`` multiplies lag i+1."""

    p: int
    d: int
    coefficients: np.ndarray
    intercept: float
    residual_variance: float = 0.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("AR order p must be >= 1")
        if self.d not in (0, 1):
            raise ValueError("differencing order d must be 0 or 1")
        if self.coefficients.shape != (self.p,):
            raise ValueError(f"need exactly {self.p} coefficients")


def ar_fit(series: TimeSeries | np.ndarray, p: int = 8, d: int = 1) -> ArModel:
    """Fit AR(p) to the d-times-differenced series by least squares.

    A constant (after differencing) series makes the lag matrix singular;
    that case falls back to an intercept-only model.
    """
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, float)
    if p < 1 or d not in (0, 1):
        raise ValueError("need p >= 1 and d in {0, 1}")
    if len(values) <= p + d + 1:
        raise SeriesTooShortError(
            f"need more than {p + d + 1} points to fit AR({p}) with d={d}"
        )
    work = np.diff(values) if d == 1 else values

    if np.ptp(work) == 0.0:
        return ArModel(
            p=p, d=d, coefficients=np.zeros(p), intercept=float(work[0]),
            residual_variance=0.0,
        )

    n = len(work)
    rows = n - p
    design = np.ones((rows, p + 1))
    for lag in range(1, p + 1):
        design[:, lag] = work[p - lag : n - lag]
    target = work[p:]
    solution, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ solution
    return ArModel(
        p=p,
        d=d,
        coefficients=solution[1:],
        intercept=float(solution[0]),
        residual_variance=float(np.mean(residuals**2)),
    )


def ar_forecast(model: ArModel, history, steps: int) -> ForecastVector:
    """Multi-step forecast by recursive substitution of own predictions."""
    values = history.values if isinstance(history, TimeSeries) else np.asarray(history, float)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if len(values) < model.p + model.d:
        raise SeriesTooShortError(
            f"need at least {model.p + model.d} history points, got {len(values)}"
        )
    work = list(np.diff(values) if model.d == 1 else values)
    predicted = []
    for _ in range(steps):
        lags = work[-model.p :][::-1]  # most recent first
        nxt = model.intercept + float(np.dot(model.coefficients, lags))
        work.append(nxt)
        predicted.append(nxt)
    out = np.asarray(predicted)
    if model.d == 1:
        out = values[-1] + np.cumsum(out)
    return ForecastVector(values=out)


def naive_forecast(history, steps: int) -> ForecastVector:
    """Persistence: repeat the last observed value."""
    values = history.values if isinstance(history, TimeSeries) else np.asarray(history, float)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if len(values) == 0:
        raise ValueError("empty history")
    return ForecastVector(values=np.full(steps, float(values[-1])))

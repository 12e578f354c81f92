"""Workload forecasting with two-mode decomposition and fused short/long
horizon models, plus a simulated vertical autoscaler for evaluating the
forecasts against latency targets and CPU budgets."""

__version__ = "0.1.0"

from .config import RunConfig
from .forecast import ForecastVector
from .pipeline import (
    ModelBundle,
    load_bundle,
    save_bundle,
    temposcale_predict,
    temposcale_train,
)
from .series import (
    NormalizationStats,
    TimeSeries,
    WindowBatch,
    inverse_normalize,
    make_windows,
    zscore_normalize,
)

__all__ = [
    "ForecastVector",
    "ModelBundle",
    "NormalizationStats",
    "RunConfig",
    "TimeSeries",
    "WindowBatch",
    "inverse_normalize",
    "load_bundle",
    "make_windows",
    "save_bundle",
    "temposcale_predict",
    "temposcale_train",
    "zscore_normalize",
    "__version__",
]

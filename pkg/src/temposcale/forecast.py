"""Forecast output container shared by all models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import NormalizationStats


@dataclass(frozen=True)
class ForecastVector:
    """Multi-step forecast in normalized space.

    ``stats`` carries the normalization needed to map back to raw units;
    models that never saw raw units attach identity stats.  ``origin_time``
    is the timestamp of the first forecast point.
    """

    values: np.ndarray
    stats: NormalizationStats = field(default_factory=NormalizationStats.identity)
    origin_time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("forecast values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("forecast values must be finite")

    def __len__(self) -> int:
        return int(self.values.size)

    def denormalized(self) -> np.ndarray:
        return self.values * self.stats.std + self.stats.mean

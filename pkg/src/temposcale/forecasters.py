"""Uniform fit/forecast adapters over every model family.

All adapters work in raw (de-normalized) space at the interface; the neural
ones keep their training normalization stats internally.
"""

from __future__ import annotations

import numpy as np

from .baselines import ar_fit, ar_forecast, naive_forecast
from .config import RunConfig
from .models import (
    LongTermNet,
    ShortTermNet,
    longterm_forward,
    longterm_train,
    shortterm_forward,
    shortterm_train,
)
from .pipeline import temposcale_predict, temposcale_train
from .series import TimeSeries, make_windows, zscore_normalize


class NaiveForecaster:
    """Persistence baseline; nothing to fit."""

    name = "naive"

    def fit(self, train: TimeSeries, config: RunConfig, seed: int) -> None:
        self.horizon_len = config.horizon_len

    def forecast(self, history: np.ndarray) -> np.ndarray:
        return naive_forecast(history, self.horizon_len).values


class ArForecaster:
    """Differenced autoregression fit once on the training split."""

    name = "arima"

    def __init__(self, p: int = 8, d: int = 1):
        self.p = p
        self.d = d

    def fit(self, train: TimeSeries, config: RunConfig, seed: int) -> None:
        self.horizon_len = config.horizon_len
        # forecasting reads p + d trailing points, so clamp to the window
        p = max(1, min(self.p, config.history_len - self.d))
        self.model = ar_fit(train, p=p, d=self.d)

    def forecast(self, history: np.ndarray) -> np.ndarray:
        return ar_forecast(self.model, history, self.horizon_len).values


class _NormalizedNet:
    """Shared plumbing: train on z-scored windows, forecast in raw space."""

    def fit(self, train: TimeSeries, config: RunConfig, seed: int) -> None:
        normalized, self.stats = zscore_normalize(train)
        batch = make_windows(
            normalized, config.history_len, config.horizon_len, config.window_stride
        )
        self._fit_net(batch, config, seed)

    def forecast(self, history: np.ndarray) -> np.ndarray:
        z = (np.asarray(history, float) - self.stats.mean) / self.stats.std
        return self._forward(z) * self.stats.std + self.stats.mean


class ShortTermForecaster(_NormalizedNet):
    """Recurrent net trained directly on the series (no decomposition)."""

    name = "shortterm"

    def _fit_net(self, batch, config: RunConfig, seed: int) -> None:
        self.net = ShortTermNet.create(
            history_len=config.history_len,
            horizon_len=config.horizon_len,
            conv_channels=config.conv_channels,
            kernel_size=config.conv_kernel,
            hidden_size=config.gru_hidden,
            dropout_rate=config.dropout_rate,
            seed=seed,
        )
        shortterm_train(
            self.net,
            batch,
            epochs=config.component_epochs,
            seed=seed,
            lr=config.learning_rate,
            batch_size=config.batch_size,
        )

    def _forward(self, history: np.ndarray) -> np.ndarray:
        return shortterm_forward(self.net, history).values


class LongTermForecaster(_NormalizedNet):
    """Attention net trained directly on the series (no decomposition)."""

    name = "longterm"

    def _fit_net(self, batch, config: RunConfig, seed: int) -> None:
        self.net = LongTermNet.create(
            history_len=config.history_len,
            horizon_len=config.horizon_len,
            d_model=config.d_model,
            n_heads=config.n_heads,
            n_layers=config.n_layers,
            label_len=config.label_len,
            ff_width=config.ff_width,
            sample_factor=config.sample_factor,
            seed=seed,
        )
        longterm_train(
            self.net,
            batch,
            epochs=config.component_epochs,
            seed=seed,
            lr=config.learning_rate,
            batch_size=config.batch_size,
        )

    def _forward(self, history: np.ndarray) -> np.ndarray:
        return longterm_forward(self.net, history).values


class TempoScaleForecaster:
    """The full decompose-route-fuse pipeline."""

    name = "temposcale"

    def fit(self, train: TimeSeries, config: RunConfig, seed: int) -> None:
        from dataclasses import replace

        self.bundle = temposcale_train(train, replace(config, seed=seed))

    def forecast(self, history: np.ndarray) -> np.ndarray:
        stats = self.bundle.stats
        z = (np.asarray(history, float) - stats.mean) / stats.std
        return temposcale_predict(self.bundle, z).denormalized()


FORECASTERS = {
    "naive": NaiveForecaster,
    "arima": ArForecaster,
    "shortterm": ShortTermForecaster,
    "longterm": LongTermForecaster,
    "temposcale": TempoScaleForecaster,
}


def make_forecaster(name: str):
    try:
        return FORECASTERS[name]()
    except KeyError:
        raise ValueError(
            f"unknown forecaster {name!r}; choose from {sorted(FORECASTERS)}"
        ) from None

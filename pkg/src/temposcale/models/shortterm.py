"""Short-horizon forecaster: 1-D convolution into a two-layer GRU."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..forecast import ForecastVector
from ..nn import autodiff as ad
from ..nn.autodiff import Tensor
from ..nn.layers import Conv1dLayerParams, DenseLayerParams, conv1d_forward, dense_forward
from ..series import WindowBatch
from .gru import GruCellParams, gru_forward
from .training import train_supervised


@dataclass
class ShortTermNet:
    """conv1d -> GRU -> GRU -> ReLU -> dropout -> dense head.

    The head reads the final hidden state and emits the whole horizon at
    once.
    """

    conv: Conv1dLayerParams
    gru1: GruCellParams
    gru2: GruCellParams
    head: DenseLayerParams
    dropout_rate: float
    history_len: int
    horizon_len: int

    def __post_init__(self):
        if self.head.n_out != self.horizon_len:
            raise ValueError("head output width must equal horizon_len")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")

    @classmethod
    def create(
        cls,
        history_len: int,
        horizon_len: int,
        conv_channels: int = 16,
        kernel_size: int = 3,
        hidden_size: int = 32,
        dropout_rate: float = 0.1,
        seed: int = 0,
    ) -> "ShortTermNet":
        rng = np.random.default_rng(seed)
        return cls(
            conv=Conv1dLayerParams.create(
                rng, 1, conv_channels, kernel_size, padding=kernel_size // 2
            ),
            gru1=GruCellParams.create(rng, conv_channels, hidden_size),
            gru2=GruCellParams.create(rng, hidden_size, hidden_size),
            head=DenseLayerParams.create(rng, hidden_size, horizon_len),
            dropout_rate=dropout_rate,
            history_len=history_len,
            horizon_len=horizon_len,
        )

    def parameters(self) -> list[Tensor]:
        return (
            self.conv.parameters()
            + self.gru1.parameters()
            + self.gru2.parameters()
            + self.head.parameters()
        )


def _forward_batch(
    net: ShortTermNet, x: Tensor, rng: np.random.Generator | None = None
) -> Tensor:
    """Histories [batch, H] to forecasts [batch, F]; rng enables dropout."""
    batch, hist = x.shape
    if hist != net.history_len:
        raise ValueError(f"expected history length {net.history_len}, got {hist}")
    channels = conv1d_forward(net.conv, ad.reshape(x, (batch, 1, hist)))
    sequence = ad.transpose(channels, (0, 2, 1))
    states = gru_forward(net.gru2, gru_forward(net.gru1, sequence))
    last = states[:, -1, :]
    activated = ad.dropout(ad.relu(last), net.dropout_rate, rng)
    return dense_forward(net.head, activated)


def shortterm_forward(net: ShortTermNet, history) -> ForecastVector:
    """Forecast one history window (inference mode, dropout disabled)."""
    values = history.data if isinstance(history, Tensor) else np.asarray(history, float)
    if values.shape != (net.history_len,):
        raise ValueError(f"expected history of shape ({net.history_len},)")
    out = _forward_batch(net, Tensor(values[None, :]), rng=None)
    return ForecastVector(values=out.data[0])


def shortterm_train(
    net: ShortTermNet,
    batch: WindowBatch,
    epochs: int,
    seed: int,
    lr: float = 1e-3,
    batch_size: int = 32,
) -> tuple[ShortTermNet, list[float]]:
    """Adam on MSE over the window batch; returns the net and loss curve."""
    if len(batch) == 0:
        raise ValueError("empty training batch")
    losses = train_supervised(
        lambda xb, rng: _forward_batch(net, xb, rng),
        net.parameters(),
        batch.histories(),
        batch.futures(),
        epochs=epochs,
        seed=seed,
        lr=lr,
        batch_size=batch_size,
    )
    return net, losses

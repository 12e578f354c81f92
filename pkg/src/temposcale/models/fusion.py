"""Fusion MLP combining short prediction, long prediction, and residual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..forecast import ForecastVector
from ..nn import autodiff as ad
from ..nn.autodiff import Tensor
from ..nn.layers import DenseLayerParams, dense_forward

DEFAULT_WIDTHS = (144, 192, 240, 240, 192, 48)


@dataclass
class FusionMlp:
    """Dense stack with ReLU between hidden layers and a linear output.

    The input width is three equal blocks: [short_pred | long_pred |
    residual_tail], each of the output width.
    """

    layers: list[DenseLayerParams]

    def __post_init__(self):
        if len(self.layers) < 2:
            raise ValueError("need at least input and output layers")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.n_out != nxt.n_in:
                raise ValueError("layer widths must chain")
        if self.widths[0] != 3 * self.widths[-1]:
            raise ValueError("input width must be three output-sized blocks")

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple([self.layers[0].n_in] + [layer.n_out for layer in self.layers])

    @property
    def block_width(self) -> int:
        return self.widths[-1]

    @classmethod
    def create(cls, widths: tuple[int, ...] = DEFAULT_WIDTHS, seed: int = 0) -> "FusionMlp":
        rng = np.random.default_rng(seed)
        layers = [
            DenseLayerParams.create(rng, n_in, n_out)
            for n_in, n_out in zip(widths, widths[1:])
        ]
        return cls(layers=layers)

    def parameters(self) -> list[Tensor]:
        return [p for layer in self.layers for p in layer.parameters()]


def fusion_forward(mlp: FusionMlp, x: Tensor) -> Tensor:
    """[batch, 3*F] inputs to [batch, F] outputs."""
    h = x
    for layer in mlp.layers[:-1]:
        h = ad.relu(dense_forward(layer, h))
    return dense_forward(mlp.layers[-1], h)


def fuse(mlp: FusionMlp, short_pred, long_pred, residual_tail) -> ForecastVector:
    """Concatenate [short_pred | long_pred | residual_tail] and run the MLP.

    Block order is part of the contract; each block must be exactly the
    MLP's output width.
    """
    width = mlp.block_width
    blocks = []
    for name, part in (
        ("short_pred", short_pred),
        ("long_pred", long_pred),
        ("residual_tail", residual_tail),
    ):
        arr = np.asarray(
            part.values if isinstance(part, ForecastVector) else part, dtype=np.float64
        )
        if arr.shape != (width,):
            raise ValueError(f"{name} must have exactly {width} points, got {arr.shape}")
        blocks.append(arr)
    x = Tensor(np.concatenate(blocks)[None, :])
    out = fusion_forward(mlp, x)
    return ForecastVector(values=out.data[0])

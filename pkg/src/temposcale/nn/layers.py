"""Parameter containers and forward functions for the network layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor


def uniform_init(
    rng: np.random.Generator, shape: tuple[int, ...], fan_in: int
) -> Tensor:
    """Seeded uniform init in +/- sqrt(1/fan_in)."""
    bound = float(np.sqrt(1.0 / fan_in))
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros_param(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def ones_param(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.ones(shape), requires_grad=True)


@dataclass
class DenseLayerParams:
    """Affine map: weights [in, out], bias [out]."""

    weights: Tensor
    bias: Tensor

    @classmethod
    def create(cls, rng: np.random.Generator, n_in: int, n_out: int) -> "DenseLayerParams":
        return cls(weights=uniform_init(rng, (n_in, n_out), n_in), bias=zeros_param((n_out,)))

    @property
    def n_in(self) -> int:
        return self.weights.shape[0]

    @property
    def n_out(self) -> int:
        return self.weights.shape[1]

    def parameters(self) -> list[Tensor]:
        return [self.weights, self.bias]


def dense_forward(params: DenseLayerParams, x) -> Tensor:
    """output = x . W + b over the last axis of x."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.shape[-1] != params.n_in:
        raise ValueError(f"dense expects last dim {params.n_in}, got {x.shape[-1]}")
    squeeze = x.ndim == 1
    if squeeze:
        x = ad.reshape(x, (1, params.n_in))
    out = ad.add(ad.matmul(x, params.weights), params.bias)
    if squeeze:
        out = ad.reshape(out, (params.n_out,))
    return out


@dataclass
class Conv1dLayerParams:
    """1-D convolution: kernel [out_ch, in_ch, k], bias [out_ch]."""

    kernel: Tensor
    bias: Tensor
    padding: int = 0
    stride: int = 1

    def __post_init__(self):
        if self.kernel.shape[2] < 1:
            raise ValueError("kernel width must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    @classmethod
    def create(
        cls,
        rng: np.random.Generator,
        in_ch: int,
        out_ch: int,
        k: int,
        padding: int = 0,
        stride: int = 1,
    ) -> "Conv1dLayerParams":
        kernel = uniform_init(rng, (out_ch, in_ch, k), in_ch * k)
        return cls(kernel=kernel, bias=zeros_param((out_ch,)), padding=padding, stride=stride)

    def parameters(self) -> list[Tensor]:
        return [self.kernel, self.bias]


def conv1d_forward(params: Conv1dLayerParams, x) -> Tensor:
    """Convolve [channels, L] or [batch, channels, L] along time."""
    return ad.conv1d(x, params.kernel, params.bias, stride=params.stride, padding=params.padding)


@dataclass
class LayerNormParams:
    """Per-feature scale and shift over the last axis."""

    gain: Tensor
    bias: Tensor
    eps: float = 1e-5

    @classmethod
    def create(cls, width: int) -> "LayerNormParams":
        return cls(gain=ones_param((width,)), bias=zeros_param((width,)))

    def parameters(self) -> list[Tensor]:
        return [self.gain, self.bias]


def layernorm_forward(params: LayerNormParams, x: Tensor) -> Tensor:
    mu = ad.mean(x, axis=-1, keepdims=True)
    centered = x - mu
    var = ad.mean(centered * centered, axis=-1, keepdims=True)
    normed = centered * ad.power(var + params.eps, -0.5)
    return normed * params.gain + params.bias

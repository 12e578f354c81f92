"""Long-horizon forecaster: sparse-attention encoder with distilling and a
single-pass generative decoder."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..forecast import ForecastVector
from ..nn import autodiff as ad
from ..nn.autodiff import Tensor
from ..nn.layers import (
    Conv1dLayerParams,
    DenseLayerParams,
    LayerNormParams,
    conv1d_forward,
    dense_forward,
    layernorm_forward,
)
from ..series import WindowBatch
from .attention import DEFAULT_SAMPLE_FACTOR, AttentionParams, probsparse_attention
from .training import train_supervised


@dataclass
class DistillLayerParams:
    """Conv(k=3, pad=1) -> ELU -> MaxPool(k=3, s=2, p=1): halves length."""

    conv: Conv1dLayerParams
    pool_kernel: int = 3
    pool_stride: int = 2
    pool_padding: int = 1

    @classmethod
    def create(cls, rng: np.random.Generator, channels: int) -> "DistillLayerParams":
        return cls(conv=Conv1dLayerParams.create(rng, channels, channels, 3, padding=1))

    def parameters(self) -> list[Tensor]:
        return self.conv.parameters()


def distill_forward(params: DistillLayerParams, x) -> Tensor:
    """Compress [d, L] or [batch, d, L] to length ceil(L/2)."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.shape[-1] < 2:
        raise ValueError("distilling needs length >= 2")
    convolved = ad.elu(conv1d_forward(params.conv, x))
    return ad.maxpool1d(
        convolved,
        kernel=params.pool_kernel,
        stride=params.pool_stride,
        padding=params.pool_padding,
    )


@dataclass
class EncoderLayerParams:
    """Self-attention and feed-forward sublayers, each followed by a
    residual connection and layer normalization."""

    attn: AttentionParams
    norm_attn: LayerNormParams
    ff_in: DenseLayerParams
    ff_out: DenseLayerParams
    norm_ff: LayerNormParams

    @classmethod
    def create(
        cls, rng: np.random.Generator, d_model: int, n_heads: int, ff_width: int
    ) -> "EncoderLayerParams":
        return cls(
            attn=AttentionParams.create(rng, d_model, n_heads),
            norm_attn=LayerNormParams.create(d_model),
            ff_in=DenseLayerParams.create(rng, d_model, ff_width),
            ff_out=DenseLayerParams.create(rng, ff_width, d_model),
            norm_ff=LayerNormParams.create(d_model),
        )

    def parameters(self) -> list[Tensor]:
        return (
            self.attn.parameters()
            + self.norm_attn.parameters()
            + self.ff_in.parameters()
            + self.ff_out.parameters()
            + self.norm_ff.parameters()
        )


@lru_cache(maxsize=64)
def _positional_encoding(length: int, d_model: int) -> np.ndarray:
    pos = np.arange(length, dtype=np.float64)[:, None]
    dim = np.arange(d_model, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * (dim // 2) / d_model)
    enc = np.where(dim % 2 == 0, np.sin(angle), np.cos(angle))
    enc.setflags(write=False)
    return enc


@dataclass
class LongTermNet:
    """Embed -> sparse-attention encoder (distill between layers) ->
    one cross-attention decode over [label tail, zero placeholders] ->
    per-position head."""

    input_embed: DenseLayerParams
    encoder_layers: list[EncoderLayerParams]
    distill_layers: list[DistillLayerParams]
    decoder_attn: AttentionParams
    decoder_norm: LayerNormParams
    head: DenseLayerParams
    history_len: int
    horizon_len: int
    label_len: int
    d_model: int
    n_heads: int
    sample_factor: float = DEFAULT_SAMPLE_FACTOR

    def __post_init__(self):
        if not self.encoder_layers:
            raise ValueError("need at least one encoder layer")
        if len(self.distill_layers) != len(self.encoder_layers) - 1:
            raise ValueError("need exactly one distill layer between encoder layers")
        if not 1 <= self.label_len <= self.history_len:
            raise ValueError("label_len must lie in [1, history_len]")

    @classmethod
    def create(
        cls,
        history_len: int,
        horizon_len: int,
        d_model: int = 32,
        n_heads: int = 4,
        n_layers: int = 2,
        label_len: int = 48,
        ff_width: int = 64,
        sample_factor: float = DEFAULT_SAMPLE_FACTOR,
        seed: int = 0,
    ) -> "LongTermNet":
        rng = np.random.default_rng(seed)
        return cls(
            input_embed=DenseLayerParams.create(rng, 1, d_model),
            encoder_layers=[
                EncoderLayerParams.create(rng, d_model, n_heads, ff_width)
                for _ in range(n_layers)
            ],
            distill_layers=[
                DistillLayerParams.create(rng, d_model) for _ in range(n_layers - 1)
            ],
            decoder_attn=AttentionParams.create(rng, d_model, n_heads),
            decoder_norm=LayerNormParams.create(d_model),
            head=DenseLayerParams.create(rng, d_model, 1),
            history_len=history_len,
            horizon_len=horizon_len,
            label_len=min(label_len, history_len),
            d_model=d_model,
            n_heads=n_heads,
            sample_factor=sample_factor,
        )

    def parameters(self) -> list[Tensor]:
        params = self.input_embed.parameters()
        for layer in self.encoder_layers:
            params += layer.parameters()
        for layer in self.distill_layers:
            params += layer.parameters()
        params += self.decoder_attn.parameters()
        params += self.decoder_norm.parameters()
        params += self.head.parameters()
        return params


def _embed(net: LongTermNet, scalars: Tensor) -> Tensor:
    """[batch, L] scalars to [batch, L, d_model] with positional encoding."""
    batch, length = scalars.shape
    tokens = dense_forward(net.input_embed, ad.reshape(scalars, (batch, length, 1)))
    return tokens + Tensor(_positional_encoding(length, net.d_model))


def _forward_batch(
    net: LongTermNet, x: Tensor, rng: np.random.Generator | None = None
) -> Tensor:
    """Histories [batch, H] to forecasts [batch, F] in one pass."""
    batch, hist = x.shape
    if hist != net.history_len:
        raise ValueError(f"expected history length {net.history_len}, got {hist}")

    h = _embed(net, x)
    for i, layer in enumerate(net.encoder_layers):
        attended = probsparse_attention(
            layer.attn, h, h, h, sample_factor=net.sample_factor
        )
        h = layernorm_forward(layer.norm_attn, h + attended)
        ff = dense_forward(layer.ff_out, ad.relu(dense_forward(layer.ff_in, h)))
        h = layernorm_forward(layer.norm_ff, h + ff)
        if i < len(net.encoder_layers) - 1:
            h = ad.transpose(
                distill_forward(net.distill_layers[i], ad.transpose(h, (0, 2, 1))),
                (0, 2, 1),
            )
    encoded = h

    label = net.label_len
    horizon = net.horizon_len
    dec_scalars = ad.concat(
        [x[:, hist - label :], Tensor(np.zeros((batch, horizon)))], axis=1
    )
    dec_tokens = _embed(net, dec_scalars)
    crossed = probsparse_attention(
        net.decoder_attn, dec_tokens, encoded, encoded, full_attention=True
    )
    decoded = layernorm_forward(net.decoder_norm, dec_tokens + crossed)
    out = dense_forward(net.head, decoded[:, label:, :])
    return ad.reshape(out, (batch, horizon))


def longterm_forward(net: LongTermNet, history) -> ForecastVector:
    """Forecast one history window in a single pass (no horizon loop)."""
    values = history.data if isinstance(history, Tensor) else np.asarray(history, float)
    if values.shape != (net.history_len,):
        raise ValueError(f"expected history of shape ({net.history_len},)")
    out = _forward_batch(net, Tensor(values[None, :]))
    return ForecastVector(values=out.data[0])


def longterm_train(
    net: LongTermNet,
    batch: WindowBatch,
    epochs: int,
    seed: int,
    lr: float = 1e-3,
    batch_size: int = 32,
) -> tuple[LongTermNet, list[float]]:
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

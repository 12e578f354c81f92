"""Gated recurrent unit cell and sequence unroll."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import autodiff as ad
from ..nn.autodiff import Tensor
from ..nn.layers import uniform_init, zeros_param


@dataclass
class GruCellParams:
    """Gate weights, each [hidden, hidden+input]; biases start at zero.

    Gates read the concatenation [h_prev, x], in that order.
    """

    W_z: Tensor
    W_r: Tensor
    W_h: Tensor
    b_z: Tensor
    b_r: Tensor
    b_h: Tensor
    hidden_size: int
    input_size: int

    def __post_init__(self):
        expect = (self.hidden_size, self.hidden_size + self.input_size)
        for w in (self.W_z, self.W_r, self.W_h):
            if w.shape != expect:
                raise ValueError(f"gate weights must have shape {expect}, got {w.shape}")

    @classmethod
    def create(
        cls, rng: np.random.Generator, input_size: int, hidden_size: int
    ) -> "GruCellParams":
        fan_in = hidden_size + input_size
        shape = (hidden_size, fan_in)
        return cls(
            W_z=uniform_init(rng, shape, fan_in),
            W_r=uniform_init(rng, shape, fan_in),
            W_h=uniform_init(rng, shape, fan_in),
            b_z=zeros_param((hidden_size,)),
            b_r=zeros_param((hidden_size,)),
            b_h=zeros_param((hidden_size,)),
            hidden_size=hidden_size,
            input_size=input_size,
        )

    def parameters(self) -> list[Tensor]:
        return [self.W_z, self.W_r, self.W_h, self.b_z, self.b_r, self.b_h]


@dataclass
class GruState:
    """One step's hidden state with the gates retained for inspection."""

    hidden: Tensor
    update_gate: Tensor
    reset_gate: Tensor
    candidate: Tensor


def gru_cell_step(params: GruCellParams, x_t, h_prev) -> GruState:
    """One recurrence step.

    z = sigmoid(W_z.[h_prev, x]), r = sigmoid(W_r.[h_prev, x]),
    h~ = tanh(W_h.[r*h_prev, x]), h = (1-z)*h_prev + z*h~.
    Accepts [input]/[hidden] vectors or [batch, ...] matrices.
    """
    x_t = x_t if isinstance(x_t, Tensor) else Tensor(x_t)
    h_prev = h_prev if isinstance(h_prev, Tensor) else Tensor(h_prev)
    squeeze = x_t.ndim == 1
    if squeeze:
        x_t = ad.reshape(x_t, (1,) + x_t.shape)
        h_prev = ad.reshape(h_prev, (1,) + h_prev.shape)
    if x_t.shape[-1] != params.input_size or h_prev.shape[-1] != params.hidden_size:
        raise ValueError(
            f"expected input {params.input_size} and hidden {params.hidden_size}, "
            f"got {x_t.shape[-1]} and {h_prev.shape[-1]}"
        )

    hx = ad.concat([h_prev, x_t], axis=-1)
    z = ad.sigmoid(ad.matmul(hx, ad.transpose(params.W_z, (1, 0))) + params.b_z)
    r = ad.sigmoid(ad.matmul(hx, ad.transpose(params.W_r, (1, 0))) + params.b_r)
    rhx = ad.concat([r * h_prev, x_t], axis=-1)
    candidate = ad.tanh(ad.matmul(rhx, ad.transpose(params.W_h, (1, 0))) + params.b_h)
    hidden = (1.0 - z) * h_prev + z * candidate

    if squeeze:
        hidden = ad.reshape(hidden, (params.hidden_size,))
        z = ad.reshape(z, (params.hidden_size,))
        r = ad.reshape(r, (params.hidden_size,))
        candidate = ad.reshape(candidate, (params.hidden_size,))
    return GruState(hidden=hidden, update_gate=z, reset_gate=r, candidate=candidate)


def gru_forward(params: GruCellParams, sequence, h0=None) -> Tensor:
    """Unroll the cell over a [T, input] or [batch, T, input] sequence.

    Returns all hidden states, [T, hidden] or [batch, T, hidden]; the
    initial state defaults to zeros.
    """
    sequence = sequence if isinstance(sequence, Tensor) else Tensor(sequence)
    squeeze = sequence.ndim == 2
    if squeeze:
        sequence = ad.reshape(sequence, (1,) + sequence.shape)
    batch, steps, _ = sequence.shape
    if h0 is None:
        h = Tensor(np.zeros((batch, params.hidden_size)))
    else:
        h = h0 if isinstance(h0, Tensor) else Tensor(h0)
        if h.ndim == 1:
            h = ad.broadcast_to(ad.reshape(h, (1, params.hidden_size)), (batch, params.hidden_size))
    outputs = []
    for t in range(steps):
        h = gru_cell_step(params, sequence[:, t, :], h).hidden
        outputs.append(h)
    stacked = ad.stack(outputs, axis=1)
    return ad.reshape(stacked, stacked.shape[1:]) if squeeze else stacked

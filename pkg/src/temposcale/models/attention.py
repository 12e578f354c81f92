"""Multi-head attention with sparsity-measured query selection.

Only the queries whose score distribution deviates most from uniform get a
full softmax attention pass; the rest fall back to the mean of the values.
Key scoring runs on an evenly strided key subsample, so the measurement is
deterministic and cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..nn import autodiff as ad
from ..nn.autodiff import Tensor
from ..nn.layers import uniform_init

DEFAULT_SAMPLE_FACTOR = 5.0


@dataclass
class AttentionParams:
    """Head projections packed as [d_model, d_model]; head i owns columns
    [i*d_k, (i+1)*d_k)."""

    W_q: Tensor
    W_k: Tensor
    W_v: Tensor
    W_o: Tensor
    d_model: int
    n_heads: int

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        for w in (self.W_q, self.W_k, self.W_v, self.W_o):
            if w.shape != (self.d_model, self.d_model):
                raise ValueError("projection matrices must be [d_model, d_model]")

    @property
    def d_k(self) -> int:
        return self.d_model // self.n_heads

    @classmethod
    def create(cls, rng: np.random.Generator, d_model: int, n_heads: int) -> "AttentionParams":
        make = lambda: uniform_init(rng, (d_model, d_model), d_model)
        return cls(
            W_q=make(), W_k=make(), W_v=make(), W_o=make(),
            d_model=d_model, n_heads=n_heads,
        )

    def parameters(self) -> list[Tensor]:
        return [self.W_q, self.W_k, self.W_v, self.W_o]


@dataclass(frozen=True)
class SparsityMeasurement:
    """Per-query deviation scores and the resulting selection."""

    scores: np.ndarray
    selected: np.ndarray
    u: int
    key_sample: np.ndarray

    def __post_init__(self):
        if len(self.selected) != min(self.u, len(self.scores)):
            raise ValueError("selected set must have min(u, L_Q) entries")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")


def _sample_size(length: int, factor: float) -> int:
    return min(length, max(1, math.ceil(factor * math.log(length))))


def _even_sample_indices(length: int, count: int) -> np.ndarray:
    """count evenly spaced indices over [0, length); deterministic."""
    if count >= length:
        return np.arange(length, dtype=np.intp)
    return np.round(np.linspace(0, length - 1, count)).astype(np.intp)


def _deviation_scores(q: np.ndarray, k_sampled: np.ndarray, d_k: int) -> np.ndarray:
    """Max-shifted log-sum-exp minus mean of scaled scores, per query.

    q is [..., L_Q, d_k]; k_sampled is [..., m, d_k]; result [..., L_Q].
    """
    s = q @ np.swapaxes(k_sampled, -1, -2) / math.sqrt(d_k)
    top = s.max(axis=-1, keepdims=True)
    lse = top[..., 0] + np.log(np.exp(s - top).sum(axis=-1))
    return lse - s.mean(axis=-1)


def _top_u(scores: np.ndarray, u: int) -> np.ndarray:
    """Indices of the u largest scores; ties go to the lowest index.

    Works over the last axis; the returned indices are sorted ascending.
    """
    order = np.argsort(-scores, axis=-1, kind="stable")
    return np.sort(order[..., :u], axis=-1)


def sparsity_measure(
    queries: np.ndarray,
    keys: np.ndarray,
    sample_factor: float = DEFAULT_SAMPLE_FACTOR,
    full_sample: bool = False,
) -> SparsityMeasurement:
    """Score every query's deviation from uniform attention over the keys.

    Scores use a key subsample of size min(L_K, ceil(factor*ln L_K));
    ``full_sample`` scores against every key instead.  Either way the top
    u = min(L_Q, ceil(factor*ln L_Q)) queries are selected.
    """
    q = np.asarray(queries, dtype=np.float64)
    k = np.asarray(keys, dtype=np.float64)
    if q.ndim != 2 or k.ndim != 2 or q.shape[1] != k.shape[1]:
        raise ValueError("queries and keys must be [length, d_k] with equal d_k")
    l_q, d_k = q.shape
    l_k = k.shape[0]
    if l_k == 0:
        raise ValueError("empty keys")
    m = l_k if full_sample else _sample_size(l_k, sample_factor)
    key_sample = _even_sample_indices(l_k, m)
    scores = _deviation_scores(q, k[key_sample], d_k)
    u = min(l_q, _sample_size(l_q, sample_factor))
    selected = _top_u(scores, u)
    return SparsityMeasurement(scores=scores, selected=selected, u=u, key_sample=key_sample)


def probsparse_attention(
    params: AttentionParams,
    queries,
    keys,
    values,
    sample_factor: float = DEFAULT_SAMPLE_FACTOR,
    full_attention: bool = False,
) -> Tensor:
    """Multi-head attention where only high-deviation queries attend.

    Inputs are [L, d_model] or [batch, L, d_model]; queries and keys/values
    may have different lengths (cross-attention).  Selected queries get
    softmax(QK^T/sqrt(d_k))V over all keys; the rest receive mean(V).
    ``full_attention`` selects every query, which reproduces dense
    attention exactly.
    """
    q_in = queries if isinstance(queries, Tensor) else Tensor(queries)
    k_in = keys if isinstance(keys, Tensor) else Tensor(keys)
    v_in = values if isinstance(values, Tensor) else Tensor(values)
    squeeze = q_in.ndim == 2
    if squeeze:
        q_in = ad.reshape(q_in, (1,) + q_in.shape)
        k_in = ad.reshape(k_in, (1,) + k_in.shape)
        v_in = ad.reshape(v_in, (1,) + v_in.shape)
    batch, l_q, d_model = q_in.shape
    l_k = k_in.shape[1]
    if d_model != params.d_model or k_in.shape[2] != params.d_model:
        raise ValueError("input width must equal d_model")
    if v_in.shape[1] != l_k:
        raise ValueError("keys and values must share length")
    heads, d_k = params.n_heads, params.d_k

    def split_heads(x: Tensor, length: int) -> Tensor:
        return ad.transpose(
            ad.reshape(x, (batch, length, heads, d_k)), (0, 2, 1, 3)
        )  # [batch, heads, length, d_k]

    q = split_heads(ad.matmul(q_in, params.W_q), l_q)
    k = split_heads(ad.matmul(k_in, params.W_k), l_k)
    v = split_heads(ad.matmul(v_in, params.W_v), l_k)

    if full_attention:
        u = l_q
        selected = np.broadcast_to(np.arange(l_q, dtype=np.intp), (batch, heads, l_q))
    else:
        u = min(l_q, _sample_size(l_q, sample_factor))
        m = _sample_size(l_k, sample_factor)
        key_sample = _even_sample_indices(l_k, m)
        dev = _deviation_scores(q.data, k.data[:, :, key_sample], d_k)
        selected = _top_u(dev, u)  # [batch, heads, u]

    sel_idx = np.repeat(selected[..., None], d_k, axis=-1)
    q_sel = ad.take_along_axis(q, sel_idx, axis=2)  # [batch, heads, u, d_k]
    scaled = ad.mul(
        ad.matmul(q_sel, ad.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(d_k)
    )
    weights = ad.softmax(scaled, axis=-1)
    attended = ad.matmul(weights, v)  # [batch, heads, u, d_k]

    base = ad.broadcast_to(ad.mean(v, axis=2, keepdims=True), (batch, heads, l_q, d_k))
    combined = ad.put_along_axis(base, sel_idx, attended, axis=2)

    merged = ad.reshape(
        ad.transpose(combined, (0, 2, 1, 3)), (batch, l_q, d_model)
    )
    out = ad.matmul(merged, params.W_o)
    return ad.reshape(out, (l_q, d_model)) if squeeze else out

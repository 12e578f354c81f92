"""Sparse-attention tests: measurement algebra and dense-attention oracles."""

import math

import numpy as np
import pytest

from temposcale.models import (
    AttentionParams,
    SparsityMeasurement,
    probsparse_attention,
    sparsity_measure,
)
from temposcale.models.attention import _even_sample_indices, _sample_size
from temposcale.nn import Tensor, grad_check


def param(data):
    return Tensor(np.asarray(data, float), requires_grad=True)


def identity_params(d_model, n_heads=1):
    eye = np.eye(d_model)
    return AttentionParams(
        W_q=param(eye), W_k=param(eye), W_v=param(eye), W_o=param(eye),
        d_model=d_model, n_heads=n_heads,
    )


def brute_force_scores(q, k, d_k):
    s = q @ k.T / math.sqrt(d_k)
    lse = np.log(np.exp(s).sum(axis=1))
    return lse - s.mean(axis=1)


def dense_attention_oracle(params, queries, keys, values):
    """Plain multi-head softmax attention in raw numpy."""
    heads, d_k = params.n_heads, params.d_k
    q = queries @ params.W_q.data
    k = keys @ params.W_k.data
    v = values @ params.W_v.data
    outs = []
    for h in range(heads):
        sl = slice(h * d_k, (h + 1) * d_k)
        s = q[:, sl] @ k[:, sl].T / math.sqrt(d_k)
        s = s - s.max(axis=1, keepdims=True)
        w = np.exp(s) / np.exp(s).sum(axis=1, keepdims=True)
        outs.append(w @ v[:, sl])
    return np.concatenate(outs, axis=1) @ params.W_o.data


class TestSparsityMeasure:
    def test_uniform_scores_give_log_sample_size(self):
        q = np.random.default_rng(0).normal(size=(6, 4))
        k = np.zeros((8, 4))  # every key scores 0 for every query
        m = sparsity_measure(q, k)
        sample = _sample_size(8, 5.0)
        np.testing.assert_allclose(m.scores, math.log(sample), atol=1e-12)
        # ties broken by lowest index
        np.testing.assert_array_equal(m.selected, np.arange(len(m.selected)))

    def test_exhaustive_oracle_full_sample(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            q = rng.normal(size=(8, 3))
            k = rng.normal(size=(8, 3))
            m = sparsity_measure(q, k, full_sample=True)
            want = brute_force_scores(q, k, 3)
            np.testing.assert_allclose(m.scores, want, atol=1e-10)
            order = np.argsort(-want, kind="stable")
            np.testing.assert_array_equal(m.selected, np.sort(order[: m.u]))

    def test_top_u_subset_when_sequence_long(self):
        rng = np.random.default_rng(2)
        q = rng.normal(size=(64, 4))
        k = rng.normal(size=(12, 4))  # 12 keys sample exhaustively at factor 5
        m = sparsity_measure(q, k)
        assert m.u == math.ceil(5.0 * math.log(64))
        assert len(m.selected) == m.u < 64
        np.testing.assert_array_equal(m.key_sample, np.arange(12))
        want = brute_force_scores(q, k, 4)
        order = np.argsort(-want, kind="stable")
        np.testing.assert_array_equal(m.selected, np.sort(order[: m.u]))

    def test_dominant_key_beats_uniform_query(self):
        rng = np.random.default_rng(3)
        k = rng.normal(size=(8, 4))
        q = np.vstack([10.0 * k[2], np.zeros(4)])  # dominant vs uniform
        m = sparsity_measure(q, k, full_sample=True)
        assert m.scores[0] > m.scores[1]

    def test_empty_keys_rejected(self):
        with pytest.raises(ValueError):
            sparsity_measure(np.ones((2, 3)), np.empty((0, 3)))

    def test_measurement_validation(self):
        with pytest.raises(ValueError):
            SparsityMeasurement(
                scores=np.ones(4), selected=np.array([0]), u=2,
                key_sample=np.arange(4),
            )
        with pytest.raises(ValueError):
            SparsityMeasurement(
                scores=np.array([1.0, np.inf]), selected=np.array([0, 1]), u=2,
                key_sample=np.arange(2),
            )

    def test_even_sample_indices_cover_ends(self):
        idx = _even_sample_indices(100, 5)
        assert idx[0] == 0 and idx[-1] == 99
        assert len(idx) == 5
        assert np.all(np.diff(idx) > 0)


class TestProbsparseAttention:
    def test_full_attention_matches_dense_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            params = AttentionParams.create(rng, d_model=8, n_heads=2)
            x = rng.normal(size=(11, 8))
            got = probsparse_attention(params, x, x, x, full_attention=True)
            want = dense_attention_oracle(params, x, x, x)
            np.testing.assert_allclose(got.data, want, atol=1e-9)

    def test_natural_full_selection_matches_dense(self):
        # At L <= 14 and factor 5 the top-u rule selects every query.
        rng = np.random.default_rng(5)
        params = AttentionParams.create(rng, d_model=4, n_heads=1)
        x = rng.normal(size=(12, 4))
        got = probsparse_attention(params, x, x, x)
        want = dense_attention_oracle(params, x, x, x)
        np.testing.assert_allclose(got.data, want, atol=1e-9)

    def test_single_key_value_passes_value_through(self):
        rng = np.random.default_rng(6)
        params = identity_params(3)
        q = rng.normal(size=(5, 3))
        kv = rng.normal(size=(1, 3))
        out = probsparse_attention(params, q, kv, kv)
        for row in out.data:
            np.testing.assert_allclose(row, kv[0], atol=1e-12)

    def test_sparse_path_matches_restricted_dense_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            params = AttentionParams.create(rng, d_model=2, n_heads=1)
            x = rng.normal(size=(8, 2))
            got = probsparse_attention(params, x, x, x, sample_factor=1.0)

            q = x @ params.W_q.data
            k = x @ params.W_k.data
            v = x @ params.W_v.data
            m = sparsity_measure(q, k, sample_factor=1.0)
            assert m.u < 8
            want = np.tile(v.mean(axis=0), (8, 1))
            s = q[m.selected] @ k.T / math.sqrt(2)
            s = s - s.max(axis=1, keepdims=True)
            w = np.exp(s) / np.exp(s).sum(axis=1, keepdims=True)
            want[m.selected] = w @ v
            np.testing.assert_allclose(got.data, want @ params.W_o.data, atol=1e-10)

    def test_selected_rows_sum_to_one(self):
        # With identity value/output paths and all-ones values, each output
        # row reproduces the attention row sum.
        rng = np.random.default_rng(8)
        params = identity_params(4)
        q = rng.normal(size=(9, 4))
        k = rng.normal(size=(9, 4))
        out = probsparse_attention(params, q, k, np.ones((9, 4)), sample_factor=1.0)
        np.testing.assert_allclose(out.data, 1.0, atol=1e-9)

    def test_batched_matches_per_sequence(self):
        rng = np.random.default_rng(9)
        params = AttentionParams.create(rng, d_model=6, n_heads=2)
        batch = rng.normal(size=(3, 10, 6))
        joint = probsparse_attention(params, batch, batch, batch).data
        for b in range(3):
            single = probsparse_attention(params, batch[b], batch[b], batch[b]).data
            np.testing.assert_allclose(joint[b], single, atol=1e-12)

    def test_cross_attention_lengths(self):
        rng = np.random.default_rng(10)
        params = AttentionParams.create(rng, d_model=4, n_heads=2)
        q = rng.normal(size=(7, 4))
        kv = rng.normal(size=(13, 4))
        out = probsparse_attention(params, q, kv, kv)
        assert out.data.shape == (7, 4)

    def test_shape_mismatch(self):
        rng = np.random.default_rng(11)
        params = AttentionParams.create(rng, d_model=4, n_heads=2)
        with pytest.raises(ValueError):
            probsparse_attention(params, np.ones((5, 3)), np.ones((5, 4)), np.ones((5, 4)))
        with pytest.raises(ValueError):
            probsparse_attention(params, np.ones((5, 4)), np.ones((6, 4)), np.ones((5, 4)))

    def test_gradients_full_selection(self):
        rng = np.random.default_rng(12)
        params = AttentionParams.create(rng, d_model=4, n_heads=2)
        x = Tensor(rng.normal(size=(5, 4)))
        target = rng.normal(size=(5, 4))

        def forward(inp):
            return probsparse_attention(params, inp, inp, inp, full_attention=True)

        err = grad_check(forward, params.parameters(), [x], target)
        assert err < 1e-4

    def test_gradients_sparse_selection(self):
        # Selection indices are data-dependent constants; gradients flow
        # through the selected rows and the mean fallback.
        rng = np.random.default_rng(13)
        params = AttentionParams.create(rng, d_model=2, n_heads=1)
        x = Tensor(rng.normal(size=(8, 2)))
        target = rng.normal(size=(8, 2))

        def forward(inp):
            return probsparse_attention(params, inp, inp, inp, sample_factor=1.0)

        err = grad_check(forward, params.parameters(), [x], target)
        assert err < 1e-4


class TestAttentionParams:
    def test_head_divisibility(self):
        with pytest.raises(ValueError):
            AttentionParams(
                W_q=param(np.eye(6)), W_k=param(np.eye(6)), W_v=param(np.eye(6)),
                W_o=param(np.eye(6)), d_model=6, n_heads=4,
            )

    def test_projection_shape(self):
        with pytest.raises(ValueError):
            AttentionParams(
                W_q=param(np.ones((4, 3))), W_k=param(np.eye(4)), W_v=param(np.eye(4)),
                W_o=param(np.eye(4)), d_model=4, n_heads=2,
            )

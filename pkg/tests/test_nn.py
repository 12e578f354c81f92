"""Tests for the tensor substrate: forwards vs oracles, gradients vs FD."""

import json

import numpy as np
import pytest

from temposcale.nn import (
    Adam,
    Conv1dLayerParams,
    DenseLayerParams,
    LayerNormParams,
    OptimizerState,
    Tensor,
    adam_step,
    conv1d_forward,
    dense_forward,
    grad_check,
    layernorm_forward,
    mse_loss,
)
from temposcale.nn import autodiff as ad
from temposcale.nn import serialize

TOL = 1e-4


def param(data):
    return Tensor(np.asarray(data, float), requires_grad=True)


class TestDenseForward:
    def test_zero_weights_gives_bias(self):
        p = DenseLayerParams(weights=param(np.zeros((3, 2))), bias=param([1.5, -2.0]))
        out = dense_forward(p, Tensor(np.ones((4, 3))))
        assert np.allclose(out.data, np.tile([1.5, -2.0], (4, 1)))

    def test_identity(self):
        p = DenseLayerParams(weights=param(np.eye(3)), bias=param(np.zeros(3)))
        x = np.arange(6.0).reshape(2, 3)
        out = dense_forward(p, Tensor(x))
        assert np.allclose(out.data, x)

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(0)
        w = rng.standard_normal((2, 2))
        b = rng.standard_normal(2)
        x = rng.standard_normal((2, 2))
        expected = np.empty((2, 2))
        for i in range(2):
            for j in range(2):
                acc = b[j]
                for k in range(2):
                    acc += x[i, k] * w[k, j]
                expected[i, j] = acc
        p = DenseLayerParams(weights=param(w), bias=param(b))
        assert np.allclose(dense_forward(p, Tensor(x)).data, expected, atol=1e-12)

    def test_shape_mismatch(self):
        p = DenseLayerParams(weights=param(np.zeros((3, 2))), bias=param(np.zeros(2)))
        with pytest.raises(ValueError):
            dense_forward(p, Tensor(np.zeros((4, 5))))

    def test_unbatched_input(self):
        p = DenseLayerParams(weights=param(np.eye(3)), bias=param(np.zeros(3)))
        out = dense_forward(p, Tensor([1.0, 2.0, 3.0]))
        assert out.shape == (3,)


class TestConv1dForward:
    def test_identity_kernel(self):
        k = np.ones((1, 1, 1))
        p = Conv1dLayerParams(kernel=param(k), bias=param(np.zeros(1)))
        x = np.arange(8.0).reshape(1, 8)
        out = conv1d_forward(p, Tensor(x))
        assert np.allclose(out.data, x)

    def test_same_length_with_padding(self):
        rng = np.random.default_rng(1)
        p = Conv1dLayerParams(
            kernel=param(rng.standard_normal((4, 2, 3))),
            bias=param(np.zeros(4)),
            padding=1,
        )
        out = conv1d_forward(p, Tensor(rng.standard_normal((2, 8))))
        assert out.shape == (4, 8)

    def test_matches_sliding_window_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(4)
        k = rng.standard_normal(2)
        b = rng.standard_normal()
        expected = np.array([x[i] * k[0] + x[i + 1] * k[1] + b for i in range(3)])
        p = Conv1dLayerParams(
            kernel=param(k.reshape(1, 1, 2)), bias=param(np.array([b]))
        )
        out = conv1d_forward(p, Tensor(x.reshape(1, 4)))
        assert np.allclose(out.data[0], expected, atol=1e-12)

    def test_stride_and_batch(self):
        rng = np.random.default_rng(3)
        p = Conv1dLayerParams(
            kernel=param(rng.standard_normal((3, 2, 3))),
            bias=param(rng.standard_normal(3)),
            padding=1,
            stride=2,
        )
        out = conv1d_forward(p, Tensor(rng.standard_normal((5, 2, 9))))
        assert out.shape == (5, 3, (9 + 2 - 3) // 2 + 1)

    def test_channel_mismatch(self):
        p = Conv1dLayerParams(kernel=param(np.zeros((1, 2, 3))), bias=param(np.zeros(1)))
        with pytest.raises(ValueError):
            conv1d_forward(p, Tensor(np.zeros((3, 8))))


class TestActivations:
    def test_definitional_points(self):
        assert ad.tanh(Tensor([0.0])).data[0] == 0.0
        assert ad.sigmoid(Tensor([0.0])).data[0] == 0.5
        assert ad.relu(Tensor([-1.0])).data[0] == 0.0
        assert ad.elu(Tensor([1.0])).data[0] == 1.0
        assert ad.elu(Tensor([-1.0])).data[0] == pytest.approx(np.expm1(-1.0))

    def test_softmax_uniform(self):
        out = ad.softmax(Tensor([0.0, 0.0, 0.0]))
        assert np.allclose(out.data, [1 / 3, 1 / 3, 1 / 3])

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((6, 9)) * 30
        out = ad.softmax(Tensor(x), axis=-1)
        assert np.all(out.data >= 0)
        assert np.allclose(out.data.sum(axis=-1), 1.0, atol=1e-9)

    def test_maxpool_halves_length(self):
        x = Tensor(np.arange(16.0).reshape(2, 8))
        out = ad.maxpool1d(x)
        assert out.shape == (2, 4)
        # windows centered on even positions with k=3, s=2, p=1
        assert np.allclose(out.data[0], [1, 3, 5, 7])

    def test_maxpool_odd_length(self):
        x = Tensor(np.arange(7.0).reshape(1, 7))
        out = ad.maxpool1d(x)
        assert out.shape == (1, 4)


class TestMseLoss:
    def test_perfect_prediction(self):
        pred = param([1.0, 2.0, 3.0])
        loss = mse_loss(pred, Tensor([1.0, 2.0, 3.0]))
        assert loss.item() == 0.0
        loss.backward()
        assert np.allclose(pred.grad, 0.0)

    def test_hand_case(self):
        loss = mse_loss(Tensor([2.0, 2.0, 2.0]), Tensor([1.0, 2.0, 3.0]))
        assert loss.item() == pytest.approx(2.0 / 3.0)

    def test_gradient_formula(self):
        pred = param([2.0, 2.0, 2.0])
        target = Tensor([1.0, 2.0, 3.0])
        mse_loss(pred, target).backward()
        assert np.allclose(pred.grad, 2.0 * (pred.data - target.data) / 3.0)

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(5)
        pred = param(rng.standard_normal(7))
        target = rng.standard_normal(7)
        err = grad_check(lambda: ad.mul(pred, 1.0), [pred], [], target, h=1e-4)
        assert err < 1e-6

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse_loss(Tensor([1.0]), Tensor([1.0, 2.0]))


class TestAdam:
    def test_zero_grads_leave_params(self):
        p = param([1.0, -2.0])
        state = OptimizerState.create([p])
        adam_step(state, [p], [np.zeros(2)])
        assert np.array_equal(p.data, [1.0, -2.0])

    def test_first_step_hand_case(self):
        # grad 1, lr 0.1: bias correction makes the first step ~= lr
        p = param([1.0])
        state = OptimizerState.create([p], lr=0.1)
        adam_step(state, [p], [np.ones(1)])
        expected = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8)
        assert p.data[0] == pytest.approx(expected, abs=1e-12)

    def test_two_steps_match_independent_recompute(self):
        g = np.array([0.7])
        p = param([0.3])
        state = OptimizerState.create([p], lr=0.01)
        state = adam_step(state, [p], [g])
        state = adam_step(state, [p], [g])

        # straight-line reimplementation of the update rule
        theta, m, v = 0.3, 0.0, 0.0
        for step in (1, 2):
            m = 0.9 * m + 0.1 * g[0]
            v = 0.999 * v + 0.001 * g[0] ** 2
            theta -= 0.01 * (m / (1 - 0.9**step)) / (np.sqrt(v / (1 - 0.999**step)) + 1e-8)
        assert p.data[0] == pytest.approx(theta, abs=1e-15)

    def test_deterministic_trajectories(self):
        def run():
            rng = np.random.default_rng(6)
            p = param(rng.standard_normal(4))
            opt = Adam([p], lr=1e-2)
            for _ in range(5):
                opt.zero_grad()
                loss = mse_loss(ad.mul(p, 1.0), Tensor(np.zeros(4)))
                loss.backward()
                opt.step()
            return p.data.copy()

        assert np.array_equal(run(), run())


class TestGradCheck:
    def test_dense_relu_toy_net(self):
        rng = np.random.default_rng(7)
        layer1 = DenseLayerParams.create(rng, 4, 5)
        layer2 = DenseLayerParams.create(rng, 5, 2)
        x = Tensor(rng.standard_normal((3, 4)) + 0.3)
        target = rng.standard_normal((3, 2))

        def forward(inp):
            return dense_forward(layer2, ad.relu(dense_forward(layer1, inp)))

        err = grad_check(forward, layer1.parameters() + layer2.parameters(), [x], target)
        assert err < TOL

    def test_conv_maxpool_elu_path(self):
        rng = np.random.default_rng(8)
        conv = Conv1dLayerParams.create(rng, 2, 3, 3, padding=1)
        x = Tensor(rng.standard_normal((2, 2, 8)))
        target = rng.standard_normal((2, 3, 4))

        def forward(inp):
            return ad.maxpool1d(ad.elu(conv1d_forward(conv, inp)))

        err = grad_check(forward, conv.parameters(), [x], target)
        assert err < TOL

    def test_layernorm_softmax_path(self):
        rng = np.random.default_rng(9)
        norm = LayerNormParams.create(6)
        x = Tensor(rng.standard_normal((4, 6)))
        target = rng.standard_normal((4, 6))

        def forward(inp):
            return ad.softmax(layernorm_forward(norm, inp), axis=-1)

        err = grad_check(forward, norm.parameters(), [x], target)
        assert err < TOL

    def test_gather_scatter_path(self):
        rng = np.random.default_rng(10)
        w = param(rng.standard_normal((5, 4)))
        idx = np.array([[2], [0]])
        target = rng.standard_normal((2, 5, 4))

        def forward():
            base = ad.broadcast_to(ad.mean(w, axis=0, keepdims=True), (2, 5, 4))
            rows = ad.take_along_axis(
                ad.broadcast_to(ad.reshape(w, (1, 5, 4)), (2, 5, 4)),
                np.repeat(idx[:, :, None], 4, axis=2),
                axis=1,
            )
            return ad.put_along_axis(
                base, np.repeat(idx[:, :, None], 4, axis=2), ad.mul(rows, 2.0), axis=1
            )

        err = grad_check(forward, [w], [], target)
        assert err < TOL

    def test_input_gradients_also_flow(self):
        rng = np.random.default_rng(11)
        x = param(rng.standard_normal((2, 3)))
        layer = DenseLayerParams.create(rng, 3, 3)
        target = rng.standard_normal((2, 3))

        def forward():
            return ad.tanh(dense_forward(layer, x))

        err = grad_check(forward, [x] + layer.parameters(), [], target)
        assert err < TOL


class TestDropout:
    def test_identity_at_inference(self):
        x = Tensor(np.ones((3, 3)))
        out = ad.dropout(x, 0.5, rng=None)
        assert out is x

    def test_training_mask_scales_survivors(self):
        x = Tensor(np.ones(10000))
        out = ad.dropout(x, 0.25, rng=np.random.default_rng(12))
        kept = out.data != 0
        assert abs(kept.mean() - 0.75) < 0.03
        assert np.allclose(out.data[kept], 1.0 / 0.75)


class TestSerialize:
    def test_round_trip(self):
        rng = np.random.default_rng(13)
        named = {
            "layer.weights": param(rng.standard_normal((3, 2))),
            "layer.bias": param(rng.standard_normal(2)),
        }
        text = serialize.dumps(named)
        arrays = serialize.loads(text)
        for name, tensor in named.items():
            assert np.array_equal(arrays[name], tensor.data)

    def test_version_checked(self):
        doc = json.loads(serialize.dumps({"w": param([1.0])}))
        doc["version"] = 99
        with pytest.raises(ValueError):
            serialize.dict_to_arrays(doc)

    def test_format_checked(self):
        with pytest.raises(ValueError):
            serialize.dict_to_arrays({"format": "other", "version": 1, "tensors": {}})

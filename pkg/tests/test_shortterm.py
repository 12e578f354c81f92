"""Short-term forecaster tests: layer-by-layer oracles and training sanity."""

import numpy as np
import pytest

from temposcale.models import ShortTermNet, shortterm_forward, shortterm_train
from temposcale.nn import Tensor, grad_check
from temposcale.series import WindowBatch


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def zero_net(history_len=12, horizon_len=4, bias=None):
    net = ShortTermNet.create(history_len, horizon_len, seed=0)
    for p in net.parameters():
        p.data[...] = 0.0
    if bias is not None:
        net.head.bias.data[...] = bias
    return net


def conv_oracle(weights, bias, x, padding):
    out_ch, _, k = weights.shape
    padded = np.pad(x, padding)
    out = np.empty((out_ch, len(x)))
    for o in range(out_ch):
        for pos in range(len(x)):
            out[o, pos] = np.dot(weights[o, 0], padded[pos : pos + k]) + bias[o]
    return out


def gru_oracle(cell, sequence):
    """Sequence [T, input] run through hand-written gate equations."""
    w_z, w_r, w_h = cell.W_z.data, cell.W_r.data, cell.W_h.data
    b_z, b_r, b_h = cell.b_z.data, cell.b_r.data, cell.b_h.data
    h = np.zeros(cell.hidden_size)
    states = []
    for x in sequence:
        hx = np.concatenate([h, x])
        z = sigmoid(w_z @ hx + b_z)
        r = sigmoid(w_r @ hx + b_r)
        cand = np.tanh(w_h @ np.concatenate([r * h, x]) + b_h)
        h = (1.0 - z) * h + z * cand
        states.append(h)
    return np.array(states)


def make_batch(histories, futures):
    pairs = tuple(
        (np.asarray(h, float), np.asarray(f, float)) for h, f in zip(histories, futures)
    )
    return WindowBatch(
        history_len=len(pairs[0][0]), horizon_len=len(pairs[0][1]), pairs=pairs
    )


class TestShortTermForward:
    def test_zero_net_outputs_head_bias(self):
        net = zero_net(bias=np.array([1.0, -2.0, 0.5, 3.0]))
        fv = shortterm_forward(net, np.random.default_rng(0).normal(size=12))
        assert np.allclose(fv.values, [1.0, -2.0, 0.5, 3.0])

    def test_default_horizon_width(self):
        net = ShortTermNet.create(history_len=96, horizon_len=48, seed=1)
        fv = shortterm_forward(net, np.zeros(96))
        assert len(fv) == 48

    def test_wrong_history_length(self):
        net = ShortTermNet.create(history_len=12, horizon_len=4, seed=0)
        with pytest.raises(ValueError):
            shortterm_forward(net, np.zeros(13))

    def test_tiny_net_layer_by_layer_oracle(self):
        rng = np.random.default_rng(42)
        net = ShortTermNet.create(
            history_len=8, horizon_len=2, conv_channels=3, hidden_size=4, seed=7
        )
        x = rng.normal(size=8)

        channels = conv_oracle(net.conv.kernel.data, net.conv.bias.data, x, padding=1)
        seq = channels.T
        h1 = gru_oracle(net.gru1, seq)
        h2 = gru_oracle(net.gru2, h1)
        last = np.maximum(h2[-1], 0.0)
        want = last @ net.head.weights.data + net.head.bias.data

        got = shortterm_forward(net, x).values
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_forward_ignores_dropout_at_inference(self):
        net = ShortTermNet.create(history_len=10, horizon_len=3, dropout_rate=0.5, seed=3)
        x = np.random.default_rng(5).normal(size=10)
        first = shortterm_forward(net, x).values
        second = shortterm_forward(net, x).values
        np.testing.assert_array_equal(first, second)

    def test_full_net_gradients(self):
        from temposcale.models.shortterm import _forward_batch

        rng = np.random.default_rng(9)
        net = ShortTermNet.create(
            history_len=6, horizon_len=2, conv_channels=2, hidden_size=3,
            dropout_rate=0.0, seed=11,
        )
        x = Tensor(rng.normal(size=(3, 6)))
        target = rng.normal(size=(3, 2))
        err = grad_check(lambda xb: _forward_batch(net, xb), net.parameters(), [x], target)
        assert err < 1e-4


class TestShortTermTrain:
    def test_memorizes_single_pair(self):
        rng = np.random.default_rng(0)
        batch = make_batch([rng.normal(size=12)], [rng.normal(size=4)])
        net = ShortTermNet.create(history_len=12, horizon_len=4, dropout_rate=0.0, seed=0)
        _, losses = shortterm_train(net, batch, epochs=500, seed=1)
        assert losses[-1] < 1e-3
        assert losses[-1] <= losses[0]

    def test_seeded_determinism(self):
        rng = np.random.default_rng(4)
        hist = [rng.normal(size=10) for _ in range(4)]
        fut = [rng.normal(size=3) for _ in range(4)]
        curves = []
        for _ in range(2):
            net = ShortTermNet.create(history_len=10, horizon_len=3, seed=2)
            _, losses = shortterm_train(net, make_batch(hist, fut), epochs=20, seed=5)
            curves.append(losses)
        assert curves[0] == curves[1]

    def test_empty_batch_rejected(self):
        net = ShortTermNet.create(history_len=4, horizon_len=2, seed=0)
        batch = WindowBatch(history_len=4, horizon_len=2, pairs=())
        with pytest.raises(ValueError):
            shortterm_train(net, batch, epochs=1, seed=0)

    def test_sine_easier_than_noise(self):
        # Same budget on a learnable signal vs white noise targets.
        rng = np.random.default_rng(8)
        t = np.arange(200) / 6.0
        sine = np.sin(t)
        hist = [sine[i : i + 16] for i in range(0, 160, 10)]
        sine_fut = [sine[i + 16 : i + 20] for i in range(0, 160, 10)]
        noise_fut = [rng.normal(size=4) for _ in range(len(hist))]

        net_a = ShortTermNet.create(history_len=16, horizon_len=4, dropout_rate=0.0, seed=1)
        _, sine_losses = shortterm_train(net_a, make_batch(hist, sine_fut), epochs=150, seed=2)
        net_b = ShortTermNet.create(history_len=16, horizon_len=4, dropout_rate=0.0, seed=1)
        _, noise_losses = shortterm_train(net_b, make_batch(hist, noise_fut), epochs=150, seed=2)
        assert noise_losses[-1] >= sine_losses[-1]

"""Shared minibatch training loop for the forecasting models."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..nn.autodiff import Tensor
from ..nn.optim import Adam, mse_loss


def train_supervised(
    forward_batch: Callable[[Tensor, np.random.Generator], Tensor],
    params: Sequence[Tensor],
    inputs: np.ndarray,
    targets: np.ndarray,
    epochs: int,
    seed: int,
    lr: float = 1e-3,
    batch_size: int = 32,
) -> list[float]:
    """Adam on MSE over shuffled minibatches; returns per-epoch mean loss.

    One generator drives shuffling and any stochastic layers, so a fixed
    seed reproduces the whole trajectory.
    """
    n = len(inputs)
    if n == 0:
        raise ValueError("empty training batch")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    rng = np.random.default_rng(seed)
    opt = Adam(list(params), lr=lr)
    losses: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = Tensor(inputs[idx])
            yb = Tensor(targets[idx])
            opt.zero_grad()
            loss = mse_loss(forward_batch(xb, rng), yb)
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        losses.append(total / n)
    return losses

"""MSE loss, the Adam optimizer, and the finite-difference gradient checker."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor


def mse_loss(pred, target) -> Tensor:
    """(1/n) sum (y - yhat)^2; gradient wrt pred is 2(yhat - y)/n."""
    pred = pred if isinstance(pred, Tensor) else Tensor(pred)
    target = target if isinstance(target, Tensor) else Tensor(target)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return ad.mean(diff * diff)


@dataclass(frozen=True)
class OptimizerState:
    """Adam moments and hyperparameters; one slot per parameter tensor."""

    step: int
    first_moment: tuple[np.ndarray, ...]
    second_moment: tuple[np.ndarray, ...]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")
        if not self.lr > 0:
            raise ValueError("lr must be positive")

    @classmethod
    def create(
        cls,
        params: Sequence[Tensor],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "OptimizerState":
        return cls(
            step=0,
            first_moment=tuple(np.zeros_like(p.data) for p in params),
            second_moment=tuple(np.zeros_like(p.data) for p in params),
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(
    state: OptimizerState, params: Sequence[Tensor], grads: Sequence[np.ndarray]
) -> OptimizerState:
    """Standard bias-corrected Adam update, applied to params in place."""
    if len(params) != len(state.first_moment) or len(grads) != len(params):
        raise ValueError("params/grads do not match optimizer state")
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m = []
    new_v = []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        g = np.asarray(g, dtype=np.float64)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**step)
        v_hat = v / (1.0 - b2**step)
        p.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m.append(m)
        new_v.append(v)
    return replace(state, step=step, first_moment=tuple(new_m), second_moment=tuple(new_v))


class Adam:
    """Convenience wrapper owning optimizer state for a parameter list."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, **kwargs):
        self.params = list(params)
        self.state = OptimizerState.create(self.params, lr=lr, **kwargs)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        grads = [
            p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params
        ]
        self.state = adam_step(self.state, self.params, grads)


def grad_check(
    forward: Callable[..., Tensor],
    params: Sequence[Tensor],
    inputs: Sequence[Tensor],
    target,
    h: float = 1e-4,
) -> float:
    """Max relative error between reverse-mode and central-difference grads.

    ``forward(*inputs)`` must return the prediction tensor; the checked loss
    is the MSE against ``target``.  The forward must be deterministic
    (disable dropout).
    """
    target = target if isinstance(target, Tensor) else Tensor(target)

    def loss_value() -> Tensor:
        return mse_loss(forward(*inputs), target)

    for p in params:
        p.zero_grad()
    loss_value().backward()
    analytic = [np.array(p.grad, copy=True) if p.grad is not None else np.zeros_like(p.data) for p in params]

    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.data.reshape(-1)
        flat_grad = grad.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = loss_value().item()
            flat[i] = keep - h
            down = loss_value().item()
            flat[i] = keep
            fd = (up - down) / (2.0 * h)
            err = abs(flat_grad[i] - fd) / max(1.0, abs(flat_grad[i]), abs(fd))
            worst = max(worst, err)
    return worst

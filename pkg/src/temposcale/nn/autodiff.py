"""Reverse-mode automatic differentiation over float64 numpy arrays.

A :class:`Tensor` records the operation that produced it; ``backward`` walks
the graph once in reverse topological order and accumulates gradients into
every tensor with ``requires_grad``.  Only the operations needed by the
forecasting models are provided, all of them batch-aware.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def _as_array(value) -> Array:
    return np.asarray(value, dtype=np.float64)


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Reduce a broadcast gradient back to the original operand shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """Array node in the computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad: Array | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    # --- construction helpers -------------------------------------------

    @staticmethod
    def _result(data: Array, parents: tuple["Tensor", ...], backward) -> "Tensor":
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    def _accumulate(self, grad: Array) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += _unbroadcast(grad, self.data.shape)

    # --- bookkeeping ------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def backward(self, grad: Array | None = None) -> None:
        """Accumulate dL/dx into every reachable tensor requiring grad."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without grad needs a scalar output")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self._accumulate(grad)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # --- operator sugar ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(_ensure(other), -1.0))

    def __rsub__(self, other):
        return add(_ensure(other), mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __getitem__(self, key):
        return take(self, key)


def _ensure(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


# --- elementwise arithmetic ------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data + b.data

    def backward(g):
        a._accumulate(g)
        b._accumulate(g)

    return Tensor._result(out_data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data * b.data

    def backward(g):
        a._accumulate(g * b.data)
        b._accumulate(g * a.data)

    return Tensor._result(out_data, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data / b.data

    def backward(g):
        a._accumulate(g / b.data)
        b._accumulate(-g * a.data / (b.data**2))

    return Tensor._result(out_data, (a, b), backward)


def power(a, exponent: float) -> Tensor:
    a = _ensure(a)
    exponent = float(exponent)
    out_data = a.data**exponent

    def backward(g):
        a._accumulate(g * exponent * a.data ** (exponent - 1.0))

    return Tensor._result(out_data, (a,), backward)


def exp(a) -> Tensor:
    a = _ensure(a)
    out_data = np.exp(a.data)

    def backward(g):
        a._accumulate(g * out_data)

    return Tensor._result(out_data, (a,), backward)


def log(a) -> Tensor:
    a = _ensure(a)

    def backward(g):
        a._accumulate(g / a.data)

    return Tensor._result(np.log(a.data), (a,), backward)


def sqrt(a) -> Tensor:
    return power(a, 0.5)


# --- reductions -------------------------------------------------------------


def tensor_sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _ensure(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.data.shape))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.data.shape))

    return Tensor._result(out_data, (a,), backward)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _ensure(a)
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.data.shape[ax] for ax in axes]))
    return mul(tensor_sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


# --- shape manipulation ------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = _ensure(a)
    out_data = a.data.reshape(shape)

    def backward(g):
        a._accumulate(g.reshape(a.data.shape))

    return Tensor._result(out_data, (a,), backward)


def transpose(a, axes) -> Tensor:
    a = _ensure(a)
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    out_data = a.data.transpose(axes)

    def backward(g):
        a._accumulate(g.transpose(inverse))

    return Tensor._result(out_data, (a,), backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = tuple(_ensure(t) for t in tensors)
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            t._accumulate(g[tuple(index)])

    return Tensor._result(out_data, tensors, backward)


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [_ensure(t) for t in tensors]
    if axis < 0:
        axis += tensors[0].ndim + 1
    expanded = [reshape(t, t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors]
    return concat(expanded, axis=axis)


def take(a, key) -> Tensor:
    """Basic (slice/int) indexing; every selected element appears once."""
    a = _ensure(a)
    out_data = a.data[key]

    def backward(g):
        full = np.zeros_like(a.data)
        full[key] += g
        a._accumulate(full)

    return Tensor._result(out_data, (a,), backward)


def broadcast_to(a, shape) -> Tensor:
    a = _ensure(a)
    out_data = np.broadcast_to(a.data, shape).copy()

    def backward(g):
        a._accumulate(g)

    return Tensor._result(out_data, (a,), backward)


def _along_axis_index(idx: Array, axis: int) -> tuple:
    grids = list(np.indices(idx.shape, sparse=True))
    grids[axis] = idx
    return tuple(grids)


def take_along_axis(a, idx: Array, axis: int) -> Tensor:
    """Gather elements along an axis; duplicates in idx are allowed."""
    a = _ensure(a)
    idx = np.asarray(idx)
    index = _along_axis_index(idx, axis % a.ndim)
    out_data = a.data[index]

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, index, g)
        a._accumulate(full)

    return Tensor._result(out_data, (a,), backward)


def put_along_axis(base, idx: Array, rows, axis: int) -> Tensor:
    """Copy of base with rows written at idx along the given axis.

    Indices must be unique along the written axis, otherwise the gradient
    with respect to ``rows`` is ill-defined.
    """
    base, rows = _ensure(base), _ensure(rows)
    idx = np.asarray(idx)
    index = _along_axis_index(idx, axis % base.ndim)
    out_data = base.data.copy()
    out_data[index] = rows.data

    def backward(g):
        g_base = g.copy()
        g_base[index] = 0.0
        base._accumulate(g_base)
        rows._accumulate(g[index])

    return Tensor._result(out_data, (base, rows), backward)


# --- matrix products ----------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = _ensure(a), _ensure(b)
    out_data = a.data @ b.data

    def backward(g):
        a._accumulate(g @ np.swapaxes(b.data, -1, -2))
        b._accumulate(np.swapaxes(a.data, -1, -2) @ g)

    return Tensor._result(out_data, (a, b), backward)


# --- activations ----------------------------------------------------------------


def relu(a) -> Tensor:
    a = _ensure(a)
    mask = a.data > 0

    def backward(g):
        a._accumulate(g * mask)

    return Tensor._result(np.where(mask, a.data, 0.0), (a,), backward)


def elu(a, alpha: float = 1.0) -> Tensor:
    a = _ensure(a)
    neg = alpha * (np.exp(np.minimum(a.data, 0.0)) - 1.0)
    out_data = np.where(a.data > 0, a.data, neg)

    def backward(g):
        a._accumulate(g * np.where(a.data > 0, 1.0, neg + alpha))

    return Tensor._result(out_data, (a,), backward)


def tanh(a) -> Tensor:
    a = _ensure(a)
    out_data = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - out_data**2))

    return Tensor._result(out_data, (a,), backward)


def sigmoid(a) -> Tensor:
    a = _ensure(a)
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        a._accumulate(g * out_data * (1.0 - out_data))

    return Tensor._result(out_data, (a,), backward)


def softmax(a, axis: int = -1) -> Tensor:
    a = _ensure(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    out_data = ex / ex.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out_data).sum(axis=axis, keepdims=True)
        a._accumulate((g - inner) * out_data)

    return Tensor._result(out_data, (a,), backward)


# --- structured ops ---------------------------------------------------------------


def conv1d(x, kernel, bias, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation along the last axis.

    ``x`` is [batch, in_ch, L] or [in_ch, L]; ``kernel`` is
    [out_ch, in_ch, k].  Output length is floor((L + 2p - k)/stride) + 1.
    """
    x, kernel, bias = _ensure(x), _ensure(kernel), _ensure(bias)
    squeeze = x.ndim == 2
    data = x.data[None] if squeeze else x.data
    batch, in_ch, length = data.shape
    out_ch, k_in, k = kernel.data.shape
    if k_in != in_ch:
        raise ValueError(f"kernel expects {k_in} channels, input has {in_ch}")
    l_out = (length + 2 * padding - k) // stride + 1
    if l_out < 1:
        raise ValueError("input too short for kernel")
    padded = np.pad(data, ((0, 0), (0, 0), (padding, padding)))
    cols = np.lib.stride_tricks.sliding_window_view(padded, k, axis=2)[:, :, ::stride]
    out_data = np.einsum("bclk,ock->bol", cols, kernel.data) + bias.data[:, None]

    def backward(g):
        if squeeze:
            g = g[None] if g.ndim == 2 else g
        kernel._accumulate(np.einsum("bol,bclk->ock", g, cols))
        bias._accumulate(g.sum(axis=(0, 2)))
        g_padded = np.zeros_like(padded)
        for tap in range(k):
            g_padded[:, :, tap : tap + stride * l_out : stride] += np.einsum(
                "bol,oc->bcl", g, kernel.data[:, :, tap]
            )
        g_x = g_padded[:, :, padding : padding + length]
        x._accumulate(g_x[0] if squeeze else g_x)

    out = Tensor._result(out_data[0] if squeeze else out_data, (x, kernel, bias), backward)
    return out


def maxpool1d(x, kernel: int = 3, stride: int = 2, padding: int = 1) -> Tensor:
    """Max pooling along the last axis; padding counts as -inf.

    With the default (3, 2, 1) geometry the length maps to ceil(L/2).
    """
    x = _ensure(x)
    squeeze = x.ndim == 2
    data = x.data[None] if squeeze else x.data
    batch, ch, length = data.shape
    padded = np.pad(data, ((0, 0), (0, 0), (padding, padding)), constant_values=-np.inf)
    windows = np.lib.stride_tricks.sliding_window_view(padded, kernel, axis=2)[:, :, ::stride]
    arg = windows.argmax(axis=3)
    out_data = np.take_along_axis(windows, arg[..., None], axis=3)[..., 0]
    l_out = out_data.shape[2]
    # source position of each winner in the unpadded input
    src = np.arange(l_out)[None, None, :] * stride + arg - padding

    def backward(g):
        if squeeze:
            g = g[None] if g.ndim == 2 else g
        full = np.zeros_like(data)
        b_idx, c_idx, _ = np.indices((batch, ch, l_out), sparse=True)
        valid = (src >= 0) & (src < length)
        np.add.at(
            full,
            (
                np.broadcast_to(b_idx, src.shape)[valid],
                np.broadcast_to(c_idx, src.shape)[valid],
                src[valid],
            ),
            g[valid],
        )
        x._accumulate(full[0] if squeeze else full)

    return Tensor._result(out_data[0] if squeeze else out_data, (x,), backward)


def dropout(x, rate: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity when rng is None (inference) or rate is 0."""
    x = _ensure(x)
    if rng is None or rate <= 0.0:
        return x
    if not rate < 1.0:
        raise ValueError("dropout rate must be < 1")
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return mul(x, Tensor(mask))

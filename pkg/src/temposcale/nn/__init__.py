"""Minimal dense-tensor substrate with reverse-mode gradients."""

from .autodiff import (
    Tensor,
    concat,
    conv1d,
    dropout,
    elu,
    exp,
    log,
    matmul,
    maxpool1d,
    mean,
    relu,
    reshape,
    sigmoid,
    softmax,
    sqrt,
    stack,
    tanh,
    tensor_sum,
    transpose,
)
from .layers import (
    Conv1dLayerParams,
    DenseLayerParams,
    LayerNormParams,
    conv1d_forward,
    dense_forward,
    layernorm_forward,
    ones_param,
    uniform_init,
    zeros_param,
)
from .optim import Adam, OptimizerState, adam_step, grad_check, mse_loss
from .serialize import dict_to_arrays, dumps, loads, tensors_to_dict

__all__ = [
    "Adam",
    "Conv1dLayerParams",
    "DenseLayerParams",
    "LayerNormParams",
    "OptimizerState",
    "Tensor",
    "adam_step",
    "concat",
    "conv1d",
    "conv1d_forward",
    "dense_forward",
    "dict_to_arrays",
    "dropout",
    "dumps",
    "elu",
    "exp",
    "grad_check",
    "layernorm_forward",
    "loads",
    "log",
    "matmul",
    "maxpool1d",
    "mean",
    "mse_loss",
    "ones_param",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "sqrt",
    "stack",
    "tanh",
    "tensor_sum",
    "tensors_to_dict",
    "transpose",
    "uniform_init",
    "zeros_param",
]

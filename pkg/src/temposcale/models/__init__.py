"""Forecasting models: GRU short-term, sparse-attention long-term, fusion."""

from .attention import (
    AttentionParams,
    SparsityMeasurement,
    probsparse_attention,
    sparsity_measure,
)
from .fusion import DEFAULT_WIDTHS, FusionMlp, fuse, fusion_forward
from .gru import GruCellParams, GruState, gru_cell_step, gru_forward
from .longterm import (
    DistillLayerParams,
    EncoderLayerParams,
    LongTermNet,
    distill_forward,
    longterm_forward,
    longterm_train,
)
from .shortterm import ShortTermNet, shortterm_forward, shortterm_train
from .training import train_supervised

__all__ = [
    "AttentionParams",
    "SparsityMeasurement",
    "probsparse_attention",
    "sparsity_measure",
    "DEFAULT_WIDTHS",
    "FusionMlp",
    "fuse",
    "fusion_forward",
    "GruCellParams",
    "GruState",
    "gru_cell_step",
    "gru_forward",
    "DistillLayerParams",
    "EncoderLayerParams",
    "LongTermNet",
    "distill_forward",
    "longterm_forward",
    "longterm_train",
    "ShortTermNet",
    "shortterm_forward",
    "shortterm_train",
    "train_supervised",
]

"""End-to-end orchestration: decompose each window, route modes to the two
forecasters, and fuse their outputs with the residual tail."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .decomposition import ceemdan
from .errors import DataError
from .forecast import ForecastVector
from .models import (
    FusionMlp,
    LongTermNet,
    ShortTermNet,
    fuse,
    fusion_forward,
    longterm_forward,
    longterm_train,
    shortterm_forward,
    shortterm_train,
    train_supervised,
)
from .nn import serialize
from .parallel import map_ordered
from .series import (
    NormalizationStats,
    TimeSeries,
    WindowBatch,
    make_windows,
    zscore_normalize,
)

BUNDLE_FORMAT = "temposcale-bundle"
BUNDLE_VERSION = 1

MODE_SHORT = "short"
MODE_LONG = "long"
MODE_RESIDUAL = "residual"


@dataclass(frozen=True)
class TaggedMode:
    """A decomposition component carrying its identity, so routing into the
    component models can be asserted rather than assumed."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in (MODE_SHORT, MODE_LONG, MODE_RESIDUAL):
            raise ValueError(f"unknown mode kind {self.kind!r}")


@dataclass(frozen=True)
class DecomposedWindow:
    """One training window with its history split into tagged modes."""

    history: np.ndarray
    future: np.ndarray
    modes: tuple[TaggedMode, TaggedMode, TaggedMode]

    def mode(self, kind: str) -> np.ndarray:
        for tagged in self.modes:
            if tagged.kind == kind:
                return tagged.values
        raise KeyError(kind)


def decompose_window(history: np.ndarray, config: RunConfig) -> tuple[TaggedMode, ...]:
    """Split one history window; the horizon is never seen here."""
    parts = ceemdan(history, config.decomposition)
    return (
        TaggedMode(MODE_SHORT, parts.imf_short.values),
        TaggedMode(MODE_LONG, parts.imf_long.values),
        TaggedMode(MODE_RESIDUAL, parts.residual.values),
    )


def prepare_windows(series: TimeSeries, config: RunConfig) -> list[DecomposedWindow]:
    """Window the normalized series and decompose every history segment."""
    batch = make_windows(
        series, config.history_len, config.horizon_len, config.window_stride
    )
    decomposed = map_ordered(
        lambda pair: decompose_window(pair[0], config), batch.pairs
    )
    return [
        DecomposedWindow(history=hist, future=fut, modes=modes)
        for (hist, fut), modes in zip(batch.pairs, decomposed)
    ]


def _component_batch(
    windows: list[DecomposedWindow], kind: str, config: RunConfig
) -> WindowBatch:
    """Route one tagged mode to a model's training batch.

    The tag check is the routing invariant: the short-term model can only
    ever see MODE_SHORT inputs, the long-term model only MODE_LONG.
    """
    pairs = []
    for w in windows:
        values = w.mode(kind)
        pairs.append((values, w.future))
    return WindowBatch(config.history_len, config.horizon_len, tuple(pairs))


def _derived_seed(base: int, salt: int) -> int:
    """Stable per-stage seed stream; independent of stage ordering."""
    return int(np.random.SeedSequence([base, salt]).generate_state(1)[0])


@dataclass(frozen=True)
class TrainingSummary:
    """Loss curves plus the frozen component errors the fusion stage saw."""

    shortterm_losses: tuple[float, ...]
    longterm_losses: tuple[float, ...]
    fusion_losses: tuple[float, ...]
    shortterm_train_mse: float
    longterm_train_mse: float


@dataclass
class ModelBundle:
    """Everything needed to forecast: the three nets, normalization stats,
    and the configuration they were built from."""

    shortterm: ShortTermNet
    longterm: LongTermNet
    fusion: FusionMlp
    stats: NormalizationStats
    config: RunConfig
    summary: TrainingSummary | None = None

    def __post_init__(self):
        cfg = self.config
        if (
            self.shortterm.history_len != cfg.history_len
            or self.shortterm.horizon_len != cfg.horizon_len
        ):
            raise ValueError("short-term net shape disagrees with config")
        if (
            self.longterm.history_len != cfg.history_len
            or self.longterm.horizon_len != cfg.horizon_len
        ):
            raise ValueError("long-term net shape disagrees with config")
        if self.fusion.block_width != cfg.horizon_len:
            raise ValueError("fusion block width disagrees with horizon_len")


def _create_nets(config: RunConfig) -> tuple[ShortTermNet, LongTermNet, FusionMlp]:
    short = ShortTermNet.create(
        history_len=config.history_len,
        horizon_len=config.horizon_len,
        conv_channels=config.conv_channels,
        kernel_size=config.conv_kernel,
        hidden_size=config.gru_hidden,
        dropout_rate=config.dropout_rate,
        seed=_derived_seed(config.seed, 1),
    )
    long = LongTermNet.create(
        history_len=config.history_len,
        horizon_len=config.horizon_len,
        d_model=config.d_model,
        n_heads=config.n_heads,
        n_layers=config.n_layers,
        label_len=config.label_len,
        ff_width=config.ff_width,
        sample_factor=config.sample_factor,
        seed=_derived_seed(config.seed, 2),
    )
    fusion = FusionMlp.create(
        widths=config.fusion_widths(), seed=_derived_seed(config.seed, 3)
    )
    return short, long, fusion


def _frozen_outputs(
    short: ShortTermNet,
    long: LongTermNet,
    windows: list[DecomposedWindow],
    horizon: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-window component forecasts and fusion inputs, components frozen."""
    fusion_inputs = np.empty((len(windows), 3 * horizon))
    short_preds = np.empty((len(windows), horizon))
    long_preds = np.empty((len(windows), horizon))
    for i, w in enumerate(windows):
        sp = shortterm_forward(short, w.mode(MODE_SHORT)).values
        lp = longterm_forward(long, w.mode(MODE_LONG)).values
        tail = w.mode(MODE_RESIDUAL)[-horizon:]
        short_preds[i] = sp
        long_preds[i] = lp
        fusion_inputs[i] = np.concatenate([sp, lp, tail])
    return short_preds, long_preds, fusion_inputs


def temposcale_train(series: TimeSeries, config: RunConfig | None = None) -> ModelBundle:
    """Two-stage training: component models first, fusion on their frozen
    outputs second.

    The series is normalized once up front (stats live in the bundle); each
    window's history is decomposed independently, so no forecast-window
    value ever reaches a model input.  Component models train against the
    raw normalized future window.
    """
    if config is None:
        config = RunConfig()
    normalized, stats = zscore_normalize(series)
    windows = prepare_windows(normalized, config)
    futures = np.stack([w.future for w in windows])

    short, long, fusion = _create_nets(config)
    _, short_losses = shortterm_train(
        short,
        _component_batch(windows, MODE_SHORT, config),
        epochs=config.component_epochs,
        seed=_derived_seed(config.seed, 4),
        lr=config.learning_rate,
        batch_size=config.batch_size,
    )
    _, long_losses = longterm_train(
        long,
        _component_batch(windows, MODE_LONG, config),
        epochs=config.component_epochs,
        seed=_derived_seed(config.seed, 5),
        lr=config.learning_rate,
        batch_size=config.batch_size,
    )

    short_preds, long_preds, fusion_inputs = _frozen_outputs(
        short, long, windows, config.horizon_len
    )
    short_mse = float(np.mean((short_preds - futures) ** 2))
    long_mse = float(np.mean((long_preds - futures) ** 2))

    fusion_losses = train_supervised(
        lambda xb, rng: fusion_forward(fusion, xb),
        fusion.parameters(),
        fusion_inputs,
        futures,
        epochs=config.fusion_epochs,
        seed=_derived_seed(config.seed, 6),
        lr=config.learning_rate,
        batch_size=config.batch_size,
    )

    summary = TrainingSummary(
        shortterm_losses=tuple(short_losses),
        longterm_losses=tuple(long_losses),
        fusion_losses=tuple(fusion_losses),
        shortterm_train_mse=short_mse,
        longterm_train_mse=long_mse,
    )
    return ModelBundle(
        shortterm=short,
        longterm=long,
        fusion=fusion,
        stats=stats,
        config=config,
        summary=summary,
    )


def temposcale_predict(bundle: ModelBundle, history) -> ForecastVector:
    """Forecast one already-normalized history window.

    Decomposes the window with the bundle's configuration, routes the fast
    mode to the short-term net and the slow mode to the long-term net, and
    fuses both forecasts with the last horizon_len residual points.
    """
    config = bundle.config
    if isinstance(history, TimeSeries):
        values = history.values
        origin = history.end_time  # first point after the window
    else:
        values = np.asarray(history, dtype=np.float64)
        origin = 0.0
    if values.shape != (config.history_len,):
        raise ValueError(
            f"expected history of length {config.history_len}, got {values.shape}"
        )
    modes = decompose_window(values, config)
    window = DecomposedWindow(
        history=values, future=np.empty(0), modes=modes
    )
    short_pred = shortterm_forward(bundle.shortterm, window.mode(MODE_SHORT))
    long_pred = longterm_forward(bundle.longterm, window.mode(MODE_LONG))
    tail = window.mode(MODE_RESIDUAL)[-config.horizon_len :]
    fused = fuse(bundle.fusion, short_pred, long_pred, tail)
    return ForecastVector(values=fused.values, stats=bundle.stats, origin_time=origin)


def _named_tensors(bundle: ModelBundle) -> dict:
    named = {}
    for prefix, net in (
        ("shortterm", bundle.shortterm),
        ("longterm", bundle.longterm),
        ("fusion", bundle.fusion),
    ):
        for i, p in enumerate(net.parameters()):
            named[f"{prefix}.{i:03d}"] = p
    return named


def bundle_to_dict(bundle: ModelBundle) -> dict:
    return {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "config": bundle.config.to_dict(),
        "stats": {"mean": bundle.stats.mean, "std": bundle.stats.std},
        "tensors": serialize.tensors_to_dict(_named_tensors(bundle)),
    }


def bundle_from_dict(raw: dict) -> ModelBundle:
    if raw.get("format") != BUNDLE_FORMAT:
        raise DataError(f"not a model bundle: format={raw.get('format')!r}")
    if raw.get("version") != BUNDLE_VERSION:
        raise DataError(f"unsupported bundle version {raw.get('version')!r}")
    config = RunConfig.from_dict(raw["config"])
    stats = NormalizationStats(mean=raw["stats"]["mean"], std=raw["stats"]["std"])
    short, long, fusion = _create_nets(config)
    bundle = ModelBundle(
        shortterm=short, longterm=long, fusion=fusion, stats=stats, config=config
    )
    arrays = serialize.dict_to_arrays(raw["tensors"])
    named = _named_tensors(bundle)
    if set(arrays) != set(named):
        raise DataError("bundle tensor names disagree with the configuration")
    for name, tensor in named.items():
        if arrays[name].shape != tensor.data.shape:
            raise DataError(f"tensor {name} has shape {arrays[name].shape}, "
                            f"expected {tensor.data.shape}")
        tensor.data[...] = arrays[name]
    return bundle


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bundle_to_dict(bundle), sort_keys=True))


def load_bundle(path: str | Path) -> ModelBundle:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"bundle file is not valid JSON: {exc}") from exc
    return bundle_from_dict(raw)

"""Run configuration: one JSON-serializable record for the whole pipeline."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from .decomposition import CeemdanConfig, EmdConfig


@dataclass(frozen=True)
class RunConfig:
    """Knobs for ingest grid, window shape, model sizes, and training."""

    interval_s: float = 15.0
    history_len: int = 192
    horizon_len: int = 48
    window_stride: int = 1
    decomposition: CeemdanConfig = field(default_factory=CeemdanConfig)
    # short-term model
    conv_channels: int = 16
    conv_kernel: int = 3
    gru_hidden: int = 32
    dropout_rate: float = 0.1
    # long-term model
    d_model: int = 32
    n_heads: int = 4
    n_layers: int = 2
    label_len: int = 48
    ff_width: int = 64
    sample_factor: float = 5.0
    # fusion hidden widths; input/output widths derive from horizon_len
    fusion_hidden: tuple[int, ...] = (192, 240, 240, 192)
    # training
    component_epochs: int = 60
    fusion_epochs: int = 60
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        counts = {
            "history_len": self.history_len,
            "horizon_len": self.horizon_len,
            "window_stride": self.window_stride,
            "conv_channels": self.conv_channels,
            "conv_kernel": self.conv_kernel,
            "gru_hidden": self.gru_hidden,
            "d_model": self.d_model,
            "n_heads": self.n_heads,
            "n_layers": self.n_layers,
            "label_len": self.label_len,
            "ff_width": self.ff_width,
            "component_epochs": self.component_epochs,
            "fusion_epochs": self.fusion_epochs,
            "batch_size": self.batch_size,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.interval_s <= 0:
            raise ValueError("interval_s must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if any(w < 1 for w in self.fusion_hidden):
            raise ValueError("fusion_hidden widths must be >= 1")

    def fusion_widths(self) -> tuple[int, ...]:
        """Full dense-stack widths: three horizon-wide blocks in, one out."""
        return (3 * self.horizon_len, *self.fusion_hidden, self.horizon_len)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fusion_hidden"] = list(self.fusion_hidden)
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(raw)
        if "decomposition" in kwargs and isinstance(kwargs["decomposition"], dict):
            sub = dict(kwargs["decomposition"])
            if "emd" in sub and isinstance(sub["emd"], dict):
                sub["emd"] = EmdConfig(**sub["emd"])
            kwargs["decomposition"] = CeemdanConfig(**sub)
        if "fusion_hidden" in kwargs:
            kwargs["fusion_hidden"] = tuple(kwargs["fusion_hidden"])
        return cls(**kwargs)

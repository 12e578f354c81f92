"""Empirical mode decomposition via envelope sifting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SeriesTooShortError
from . import backend

MIN_SIGNAL_LENGTH = 4


@dataclass(frozen=True)
class EmdConfig:
    """Sifting controls.

    ``sd_stop_threshold`` bounds the normalized squared change between sift
    iterates; a candidate is accepted once the change is small and the mode
    property (extrema and zero-crossing counts differ by at most one) holds,
    or after ``max_sift_iterations`` passes regardless.
    """

    max_imfs: int = 8
    max_sift_iterations: int = 50
    sd_stop_threshold: float = 0.3

    def __post_init__(self):
        if self.max_imfs < 1:
            raise ValueError("max_imfs must be >= 1")
        if self.max_sift_iterations < 1:
            raise ValueError("max_sift_iterations must be >= 1")
        if not self.sd_stop_threshold > 0:
            raise ValueError("sd_stop_threshold must be positive")


def has_imf_property(x: np.ndarray) -> bool:
    """True when extrema and zero-crossing counts differ by at most one."""
    n_ext, n_cross = backend.kernel.extrema_and_crossing_counts(
        np.ascontiguousarray(x, dtype=np.float64)
    )
    return abs(n_ext - n_cross) <= 1


def _sift_mode(x: np.ndarray, config: EmdConfig) -> np.ndarray | None:
    """Extract one mode from x, or None when x has no oscillation to sift."""
    h = x.copy()
    sifted = False
    for _ in range(config.max_sift_iterations):
        mean_env, _, _ = backend.kernel.envelope_mean(h)
        if mean_env is None:
            break
        denom = float(np.sum(h * h))
        h = h - mean_env
        sifted = True
        if denom == 0.0:
            break
        sd = float(np.sum(mean_env * mean_env)) / denom
        if sd < config.sd_stop_threshold and has_imf_property(h):
            break
    return h if sifted else None


def emd(
    signal: np.ndarray, config: EmdConfig | None = None
) -> tuple[list[np.ndarray], np.ndarray]:
    """Decompose a signal into intrinsic modes plus a residual.

    Modes are extracted fast-to-slow until ``config.max_imfs`` is reached or
    the running residual has fewer than two maxima or two minima.  The modes
    and residual sum back to the input exactly up to floating-point
    reassociation.  Signals shorter than 4 points are rejected; monotonic or
    constant signals yield zero modes and residual equal to the input.
    """
    if config is None:
        config = EmdConfig()
    x = np.ascontiguousarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < MIN_SIGNAL_LENGTH:
        raise SeriesTooShortError(
            f"need a 1-D signal of at least {MIN_SIGNAL_LENGTH} points"
        )
    residual = x.copy()
    imfs: list[np.ndarray] = []
    while len(imfs) < config.max_imfs:
        maxima, minima = backend.kernel.find_extrema(residual)
        if len(maxima) < 2 or len(minima) < 2:
            break
        mode = _sift_mode(residual, config)
        if mode is None:
            break
        imfs.append(mode)
        residual = residual - mode
    return imfs, residual

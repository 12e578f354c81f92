"""Selection between the compiled and pure-Python envelope kernels.

The compiled kernel is preferred when importable; setting the environment
variable ``TEMPOSCALE_PURE_PYTHON`` to a non-empty value forces the pure
twin.  Both produce numerically identical envelopes, so the choice only
affects speed.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _envelope_py


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("TEMPOSCALE_PURE_PYTHON"):
        return _envelope_py, "python"
    try:
        from . import _envelope_cy
    except ImportError:
        return _envelope_py, "python"
    return _envelope_cy, "cython"


kernel, _backend_name = _load()


def active_backend() -> str:
    """Name of the kernel in use: ``"cython"`` or ``"python"``."""
    return _backend_name


def use(name: str) -> None:
    """Force a backend by name; mainly for tests and benchmarks."""
    global kernel, _backend_name
    if name == "python":
        kernel = _envelope_py
    elif name == "cython":
        from . import _envelope_cy

        kernel = _envelope_cy
    else:
        raise ValueError(f"unknown backend {name!r}")
    _backend_name = name

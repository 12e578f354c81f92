"""Thread-count policy and an order-preserving parallel map.

``TEMPOSCALE_THREADS`` caps worker threads for ensemble trials and study
cells; the default of 1 keeps everything sequential, which is also the
reference execution order for determinism checks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def max_workers() -> int:
    raw = os.environ.get("TEMPOSCALE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def map_ordered(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply fn to items, preserving input order in the result list."""
    seq: Sequence[T] = list(items)
    workers = max_workers()
    if workers == 1 or len(seq) <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))

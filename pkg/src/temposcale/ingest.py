"""Loading and cleaning of raw per-container utilization traces.

The expected CSV layout is one row per (timestamp, container) observation:

    timestamp,msname,msinstanceid,nodeid,cpu_utilization,memory_utilization

Rows for one service name are averaged per timestamp and resampled onto a
uniform clock so downstream code can assume a fixed interval.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .series import TimeSeries

log = logging.getLogger(__name__)

TRACE_COLUMNS = (
    "timestamp",
    "msname",
    "msinstanceid",
    "nodeid",
    "cpu_utilization",
    "memory_utilization",
)

# Gaps up to this many modal intervals are bridged by linear interpolation;
# anything longer is treated as a broken trace.
MAX_GAP_INTERVALS = 5


@dataclass(frozen=True)
class RawTraceRow:
    """One parsed observation from the raw trace."""

    timestamp: float
    msname: str
    msinstanceid: str
    nodeid: str
    cpu_utilization: float
    memory_utilization: float


def _parse_rows(path: str, target_series: str) -> tuple[list[RawTraceRow], int]:
    """Read and filter rows; returns (kept rows, dropped count)."""
    rows: list[RawTraceRow] = []
    dropped = 0
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read trace file {path!r}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not set(TRACE_COLUMNS) <= set(reader.fieldnames):
            raise DataError(
                f"trace file {path!r} must have columns {', '.join(TRACE_COLUMNS)}"
            )
        for raw in reader:
            try:
                row = RawTraceRow(
                    timestamp=float(raw["timestamp"]),
                    msname=raw["msname"].strip(),
                    msinstanceid=raw["msinstanceid"].strip(),
                    nodeid=raw["nodeid"].strip(),
                    cpu_utilization=float(raw["cpu_utilization"]),
                    memory_utilization=float(raw["memory_utilization"]),
                )
            except (TypeError, ValueError, KeyError):
                dropped += 1
                continue
            if not (np.isfinite(row.timestamp) and np.isfinite(row.cpu_utilization)):
                dropped += 1
                continue
            if not 0.0 <= row.cpu_utilization <= 100.0:
                dropped += 1
                continue
            if target_series != "*" and row.msname != target_series:
                continue
            rows.append(row)
    return rows, dropped


def load_trace(path: str, target_series: str) -> TimeSeries:
    """Load one service's CPU utilization as a uniform series.

    ``target_series`` selects the ``msname`` to keep (``"*"`` keeps all).
    Rows that fail to parse, are non-finite, or carry negative utilization
    are dropped and counted.  Observations sharing a timestamp (duplicates
    or multiple containers) are averaged.  The series is resampled onto the
    modal sampling interval; short gaps are linearly interpolated, gaps over
    ``MAX_GAP_INTERVALS`` intervals raise :class:`DataError`.
    """
    rows, dropped = _parse_rows(path, target_series)
    if dropped:
        log.info("dropped %d unusable rows from %s", dropped, path)
    if not rows:
        raise DataError(f"no usable rows for series {target_series!r} in {path!r}")

    by_time: dict[float, list[float]] = {}
    for row in rows:
        by_time.setdefault(row.timestamp, []).append(row.cpu_utilization)
    times = np.array(sorted(by_time), dtype=np.float64)
    values = np.array([np.mean(by_time[t]) for t in times], dtype=np.float64)

    if times.size == 1:
        return TimeSeries(start_time=float(times[0]), interval=1.0, values=values)

    diffs = np.diff(times)
    if np.any(diffs <= 0):
        raise AssertionError("timestamps not strictly increasing after averaging")
    uniq, counts = np.unique(diffs, return_counts=True)
    interval = float(uniq[np.argmax(counts)])

    gaps = diffs[diffs > interval]
    if gaps.size:
        log.warning(
            "%d gaps larger than the modal interval %.6g (longest %.6g)",
            gaps.size,
            interval,
            float(gaps.max()),
        )
    if np.any(diffs > MAX_GAP_INTERVALS * interval):
        raise DataError(
            f"trace has a gap longer than {MAX_GAP_INTERVALS} intervals; refusing to fill"
        )

    n_out = int(round((times[-1] - times[0]) / interval)) + 1
    grid = times[0] + interval * np.arange(n_out, dtype=np.float64)
    resampled = np.interp(grid, times, values)
    return TimeSeries(start_time=float(times[0]), interval=interval, values=resampled)

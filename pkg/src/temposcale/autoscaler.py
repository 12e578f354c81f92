"""Simulated prediction-driven vertical scaling.

A QPS trace drives CPU demand through a profiling curve; every prediction
cycle a forecaster plans the next cycle's allocations, which are actuated
tick by tick and scored with a utilization latency model, SLO thresholds,
and exact budget accounting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .series import TimeSeries

RHO_CAP = 0.999
RT_FLOOR = 1e-3
DEFAULT_BASE_RT_MS = 40.0
DEFAULT_SLO_THRESHOLDS = (200.0, 250.0)
BUDGET_MATCH_RTOL = 0.005


@dataclass(frozen=True)
class ProfilingCurve:
    """Monotone piecewise-linear map from offered QPS to CPU milli-cores."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.knots) < 2:
            raise ValueError("need at least 2 knots")
        qs = [q for q, _ in self.knots]
        cs = [c for _, c in self.knots]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ValueError("knot qps must be strictly increasing")
        if any(b < a for a, b in zip(cs, cs[1:])):
            raise ValueError("knot cpu must be non-decreasing")


def _pool_adjacent_violators(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted non-decreasing fit: pool neighbors until monotone."""
    blocks = [[values[i], weights[i], 1] for i in range(len(values))]  # mean, w, count
    i = 0
    while i < len(blocks) - 1:
        if blocks[i][0] > blocks[i + 1][0] + 0.0:
            m1, w1, n1 = blocks[i]
            m2, w2, n2 = blocks[i + 1]
            merged = [(m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, n1 + n2]
            blocks[i : i + 2] = [merged]
            i = max(i - 1, 0)
        else:
            i += 1
    out = np.empty(len(values))
    pos = 0
    for mean, _, count in blocks:
        out[pos : pos + count] = mean
        pos += count
    return out


def fit_profile(samples) -> ProfilingCurve:
    """Average duplicate qps, then isotonic-fit cpu over qps."""
    pts = [(float(q), float(c)) for q, c in samples]
    if len(pts) < 2:
        raise ValueError("need at least 2 profiling samples")
    by_qps: dict[float, list[float]] = {}
    for q, c in pts:
        by_qps.setdefault(q, []).append(c)
    qs = np.array(sorted(by_qps))
    if len(qs) < 2:
        raise ValueError("need at least 2 distinct qps levels")
    cs = np.array([np.mean(by_qps[q]) for q in qs])
    weights = np.array([len(by_qps[q]) for q in qs], dtype=float)
    fitted = _pool_adjacent_violators(cs, weights)
    return ProfilingCurve(knots=tuple(zip(qs.tolist(), fitted.tolist())))


def qps_to_cpu(curve: ProfilingCurve, qps: float) -> float:
    """Flat below the first knot, linear between knots, last-segment slope
    extrapolated above the last knot."""
    if qps < 0:
        raise ValueError("qps must be non-negative")
    qs = np.array([q for q, _ in curve.knots])
    cs = np.array([c for _, c in curve.knots])
    if qps <= qs[0]:
        return float(cs[0])
    if qps >= qs[-1]:
        slope = (cs[-1] - cs[-2]) / (qs[-1] - qs[-2])
        return float(cs[-1] + slope * (qps - qs[-1]))
    return float(np.interp(qps, qs, cs))


def response_time(demand_milli: float, alloc_milli: float, base_rt_ms: float) -> float:
    """Utilization latency model: base_rt / (1 - rho), capped near saturation."""
    if alloc_milli <= 0:
        raise ValueError("allocation must be positive")
    if demand_milli < 0:
        raise ValueError("demand must be non-negative")
    rho = min(demand_milli / alloc_milli, RHO_CAP)
    return base_rt_ms / max(RT_FLOOR, 1.0 - rho)


@dataclass(frozen=True)
class ScalingPolicy:
    prediction_cycle_s: float = 720.0
    actuation_tick_s: float = 15.0
    headroom_fraction: float = 0.10
    min_alloc_milli: float = 100.0
    max_alloc_milli: float = 4000.0

    def __post_init__(self):
        if self.actuation_tick_s <= 0 or self.prediction_cycle_s <= 0:
            raise ValueError("cycle and tick must be positive")
        ratio = self.prediction_cycle_s / self.actuation_tick_s
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("actuation tick must divide the prediction cycle")
        if self.headroom_fraction < 0:
            raise ValueError("headroom must be non-negative")
        if not 0 < self.min_alloc_milli <= self.max_alloc_milli:
            raise ValueError("need 0 < min_alloc <= max_alloc")

    @property
    def ticks_per_cycle(self) -> int:
        return int(round(self.prediction_cycle_s / self.actuation_tick_s))


@dataclass(frozen=True)
class SimulationReport:
    """Per-tick trajectory plus latency and budget aggregates."""

    times: np.ndarray
    qps: np.ndarray
    demand_milli: np.ndarray
    alloc_milli: np.ndarray
    response_ms: np.ndarray
    avg_rt: float
    p99_rt: float
    max_rt: float
    slo_violation_rate: dict[float, float]
    cpu_budget: float
    cpu_usage: float
    fallback_cycles: int = 0

    def __post_init__(self):
        if any(not 0.0 <= r <= 1.0 for r in self.slo_violation_rate.values()):
            raise ValueError("violation rates must lie in [0, 1]")
        if self.cpu_usage > self.cpu_budget + 1e-9:
            raise ValueError("usage cannot exceed budget")
        if self.p99_rt > self.max_rt + 1e-9 or self.avg_rt > self.max_rt + 1e-9:
            raise ValueError("rt aggregates are inconsistent")


def _score_schedule(
    times: np.ndarray,
    qps: np.ndarray,
    demand: np.ndarray,
    alloc: np.ndarray,
    tick_s: float,
    base_rt_ms: float,
    slo_thresholds,
    fallback_cycles: int = 0,
) -> SimulationReport:
    rt = np.array([response_time(d, a, base_rt_ms) for d, a in zip(demand, alloc)])
    # budget and usage summed in schedule order so reruns reproduce the
    # exact same floating-point totals
    budget = 0.0
    usage = 0.0
    for d, a in zip(demand, alloc):
        budget += a * tick_s
        usage += min(d, a) * tick_s
    return SimulationReport(
        times=times,
        qps=qps,
        demand_milli=demand,
        alloc_milli=alloc,
        response_ms=rt,
        avg_rt=float(np.mean(rt)),
        p99_rt=float(np.percentile(rt, 99)),
        max_rt=float(np.max(rt)),
        slo_violation_rate={
            float(t): float(np.mean(rt > t)) for t in slo_thresholds
        },
        cpu_budget=budget,
        cpu_usage=usage,
        fallback_cycles=fallback_cycles,
    )


def simulate(
    qps_trace: TimeSeries,
    forecaster,
    curve: ProfilingCurve,
    policy: ScalingPolicy | None = None,
    base_rt_ms: float = DEFAULT_BASE_RT_MS,
    slo_thresholds=DEFAULT_SLO_THRESHOLDS,
) -> SimulationReport:
    """Run the prediction-actuation loop over a QPS trace.

    ``forecaster`` is called once per prediction cycle as
    ``forecaster(history_qps, steps)`` with all trace values before the
    cycle start, and must return ``steps`` QPS predictions.  A cycle whose
    forecast fails falls back to persistence (zero QPS when there is no
    history yet) and is counted.
    """
    if policy is None:
        policy = ScalingPolicy()
    if abs(qps_trace.interval - policy.actuation_tick_s) > 1e-9:
        raise DataError(
            f"trace interval {qps_trace.interval}s must equal the actuation "
            f"tick {policy.actuation_tick_s}s"
        )
    values = qps_trace.values
    ticks_per_cycle = policy.ticks_per_cycle
    if len(values) < ticks_per_cycle:
        raise DataError("trace must cover at least one prediction cycle")
    n_ticks = (len(values) // ticks_per_cycle) * ticks_per_cycle

    alloc = np.empty(n_ticks)
    fallback_cycles = 0
    for start in range(0, n_ticks, ticks_per_cycle):
        history = values[:start]
        try:
            predicted = np.asarray(forecaster(history, ticks_per_cycle), dtype=float)
            if predicted.shape != (ticks_per_cycle,) or not np.all(
                np.isfinite(predicted)
            ):
                raise ValueError("bad forecast shape or values")
        except Exception:
            fallback_cycles += 1
            last = float(history[-1]) if len(history) else 0.0
            predicted = np.full(ticks_per_cycle, last)
        predicted = np.maximum(predicted, 0.0)
        for i in range(ticks_per_cycle):
            planned = qps_to_cpu(curve, float(predicted[i]))
            alloc[start + i] = min(
                max(planned * (1.0 + policy.headroom_fraction), policy.min_alloc_milli),
                policy.max_alloc_milli,
            )

    qps = values[:n_ticks]
    demand = np.array([qps_to_cpu(curve, float(q)) for q in qps])
    times = qps_trace.start_time + policy.actuation_tick_s * np.arange(n_ticks)
    return _score_schedule(
        times, qps, demand, alloc, policy.actuation_tick_s, base_rt_ms,
        slo_thresholds, fallback_cycles,
    )


def replay(
    qps_trace: TimeSeries,
    alloc_schedule: np.ndarray,
    curve: ProfilingCurve,
    policy: ScalingPolicy | None = None,
    base_rt_ms: float = DEFAULT_BASE_RT_MS,
    slo_thresholds=DEFAULT_SLO_THRESHOLDS,
) -> SimulationReport:
    """Score a fixed allocation schedule against the trace."""
    if policy is None:
        policy = ScalingPolicy()
    n = len(alloc_schedule)
    if n > len(qps_trace):
        raise DataError("schedule longer than trace")
    qps = qps_trace.values[:n]
    demand = np.array([qps_to_cpu(curve, float(q)) for q in qps])
    times = qps_trace.start_time + policy.actuation_tick_s * np.arange(n)
    return _score_schedule(
        times, qps, demand, np.asarray(alloc_schedule, float),
        policy.actuation_tick_s, base_rt_ms, slo_thresholds,
    )


def normalize_budget(
    schedules: list[np.ndarray],
    tick_s: float,
    policy: ScalingPolicy | None = None,
) -> tuple[list[np.ndarray], list[float]]:
    """Scale every schedule to the first schedule's budget, then clamp.

    Returns the scaled schedules and the factors applied.  If clamping
    pushes any budget more than 0.5% away from the reference, the
    schedules are not comparable and an error is raised.
    """
    if policy is None:
        policy = ScalingPolicy()
    if len(schedules) < 2:
        raise ValueError("need at least 2 schedules to normalize")
    budgets = [float(np.sum(s) * tick_s) for s in schedules]
    if any(b <= 0 for b in budgets):
        raise ValueError("zero-budget schedule cannot be normalized")
    reference = budgets[0]
    scaled = []
    factors = []
    for schedule, budget in zip(schedules, budgets):
        factor = reference / budget
        adjusted = np.clip(
            np.asarray(schedule, float) * factor,
            policy.min_alloc_milli,
            policy.max_alloc_milli,
        )
        achieved = float(np.sum(adjusted) * tick_s)
        if abs(achieved - reference) > BUDGET_MATCH_RTOL * reference:
            raise DataError(
                f"clamping broke budget normalization: {achieved} vs {reference}"
            )
        scaled.append(adjusted)
        factors.append(factor)
    return scaled, factors


def naive_qps_forecaster(history: np.ndarray, steps: int) -> np.ndarray:
    """Persistence: repeat the newest observed rate."""
    if len(history) == 0:
        raise ValueError("no history yet")
    return np.full(steps, float(history[-1]))


class OracleQpsForecaster:
    """Reads the true future from the full trace (upper-bound reference)."""

    def __init__(self, trace: TimeSeries):
        self.values = trace.values

    def __call__(self, history: np.ndarray, steps: int) -> np.ndarray:
        start = len(history)
        future = self.values[start : start + steps]
        if len(future) < steps:
            pad = np.full(steps - len(future), self.values[-1])
            future = np.concatenate([future, pad])
        return future.astype(float)

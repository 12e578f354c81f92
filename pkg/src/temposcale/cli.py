"""Command line front end: the whole toolkit as reproducible subcommands.

Every subcommand reads plain CSV/JSON, writes plain CSV/JSON (header row,
comma separators, ``.`` decimals, LF line endings, no timestamps), and is
byte-deterministic under a fixed ``--seed``.  Exit codes: 0 on success,
1 on usage errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import fields as dataclass_fields
from dataclasses import replace
from pathlib import Path

import numpy as np

from .autoscaler import (
    OracleQpsForecaster,
    ScalingPolicy,
    fit_profile,
    naive_qps_forecaster,
    simulate,
)
from .baselines import ar_fit, ar_forecast, naive_forecast
from .config import RunConfig
from .decomposition import ceemdan
from .errors import DataError, TemposcaleError
from .evaluation import evaluate, horizon_study
from .forecasters import FORECASTERS
from .ingest import load_trace
from .pipeline import load_bundle, save_bundle, temposcale_predict, temposcale_train
from .series import TimeSeries


class UsageError(Exception):
    """Bad flags or malformed flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; route through
    # UsageError instead so run() can map usage problems to exit 1
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# deterministic file I/O


def _fmt(value) -> str:
    """Shortest round-trip decimal form; empty cell for absent values."""
    if value is None:
        return ""
    return repr(float(value))


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def _write_json(path: str, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _load_json(path: str) -> dict:
    try:
        payload = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataError(f"{path} must hold a JSON object")
    return payload


def _read_csv(path: str, expected_header: tuple[str, ...]) -> list[tuple[float, ...]]:
    reader = csv.reader(io.StringIO(_read_text(path)))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != list(expected_header):
        raise DataError(
            f"{path}: expected header {','.join(expected_header)!r}, got {header}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected_header):
            raise DataError(f"{path}:{lineno}: expected {len(expected_header)} fields")
        try:
            rows.append(tuple(float(cell) for cell in row))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _read_series_csv(path: str) -> TimeSeries:
    rows = _read_csv(path, ("t", "value"))
    if len(rows) < 2:
        raise DataError(f"{path}: need at least two rows to infer the sample interval")
    t = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    interval = t[1] - t[0]
    if interval <= 0 or not np.allclose(np.diff(t), interval, rtol=0, atol=1e-6):
        raise DataError(f"{path}: timestamps must be uniformly spaced and increasing")
    return TimeSeries(float(t[0]), float(interval), values)


def _write_series_csv(path: str, series: TimeSeries) -> None:
    times = series.start_time + series.interval * np.arange(len(series))
    _write_csv(
        path,
        ["t", "value"],
        ([_fmt(t), _fmt(v)] for t, v in zip(times, series.values)),
    )


def _write_forecast_csv(path: str, origin: float, interval: float, values) -> None:
    _write_csv(
        path,
        ["t", "value"],
        (
            [_fmt(origin + i * interval), _fmt(v)]
            for i, v in enumerate(np.asarray(values))
        ),
    )


# ---------------------------------------------------------------------------
# config plumbing


def _load_config(args) -> RunConfig:
    """Config file first, then flag overrides (flags win)."""
    if getattr(args, "config", None):
        config = RunConfig.from_dict(_load_json(args.config))
    else:
        config = RunConfig()
    updates = {}
    for flag, field in (
        ("history_len", "history_len"),
        ("horizon_len", "horizon_len"),
        ("stride", "window_stride"),
        ("epochs", "component_epochs"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[field] = value
    if getattr(args, "epochs", None) is not None:
        updates["fusion_epochs"] = args.epochs
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
        updates["decomposition"] = replace(
            config.decomposition, rng_seed=args.seed
        )
    return replace(config, **updates) if updates else config


def _parse_horizons(spec: str) -> list[tuple[int, int]]:
    pairs = []
    for chunk in spec.split(","):
        head, sep, tail = chunk.partition(":")
        try:
            if not sep:
                raise ValueError
            pairs.append((int(head), int(tail)))
        except ValueError:
            raise UsageError(
                f"bad --horizons entry {chunk!r}; expected HISTORY:FUTURE pairs "
                "like 192:48,96:24"
            ) from None
    return pairs


def _parse_models(spec: str) -> list[str]:
    names = [name.strip() for name in spec.split(",") if name.strip()]
    unknown = [name for name in names if name not in FORECASTERS]
    if unknown or not names:
        raise UsageError(
            f"unknown models {unknown}; choose from {sorted(FORECASTERS)}"
        )
    return names


def _parse_slos(spec: str) -> tuple[float, ...]:
    try:
        thresholds = tuple(float(s) for s in spec.split(","))
    except ValueError:
        raise UsageError(f"bad --slo list {spec!r}") from None
    if not thresholds or any(t <= 0 for t in thresholds):
        raise UsageError("--slo thresholds must be positive")
    return thresholds


def _load_policy(path: str | None) -> ScalingPolicy:
    if path is None:
        return ScalingPolicy()
    raw = _load_json(path)
    known = {f.name for f in dataclass_fields(ScalingPolicy)}
    unknown = set(raw) - known
    if unknown:
        raise DataError(f"unknown policy fields: {sorted(unknown)}")
    return ScalingPolicy(**raw)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ingest(args) -> None:
    series = load_trace(args.infile, args.series)
    _write_series_csv(args.out, series)


def _cmd_decompose(args) -> None:
    config = _load_config(args)
    series = _read_series_csv(args.infile)
    dec = ceemdan(series, config.decomposition)
    times = series.start_time + series.interval * np.arange(len(series))
    _write_csv(
        args.out,
        ["t", "imf_short", "imf_long", "residual"],
        (
            [_fmt(t), _fmt(s), _fmt(l), _fmt(r)]
            for t, s, l, r in zip(
                times, dec.imf_short.values, dec.imf_long.values, dec.residual.values
            )
        ),
    )


def _cmd_train(args) -> None:
    config = _load_config(args)
    series = _read_series_csv(args.infile)
    bundle = temposcale_train(series, config)
    save_bundle(bundle, args.out)


def _cmd_predict(args) -> None:
    bundle = load_bundle(args.bundle)
    series = _read_series_csv(args.infile)
    h = bundle.config.history_len
    if len(series) < h:
        raise DataError(
            f"series has {len(series)} points but the bundle needs {h}"
        )
    tail_start = series.start_time + series.interval * (len(series) - h)
    z = (series.values[-h:] - bundle.stats.mean) / bundle.stats.std
    window = TimeSeries(tail_start, series.interval, z)
    forecast = temposcale_predict(bundle, window)
    _write_forecast_csv(
        args.out, forecast.origin_time, series.interval, forecast.denormalized()
    )


def _cmd_baseline(args) -> None:
    series = _read_series_csv(args.infile)
    steps = args.steps
    if args.model == "naive":
        forecast = naive_forecast(series.values, steps)
    else:
        model = ar_fit(series, p=args.p, d=args.d)
        forecast = ar_forecast(model, series.values, steps)
    _write_forecast_csv(args.out, series.end_time, series.interval, forecast.values)


def _cmd_evaluate(args) -> None:
    actual = _read_series_csv(args.actual)
    predicted = _read_series_csv(args.predicted)
    report = evaluate(actual.values, predicted.values)
    _write_json(
        args.out,
        {
            "mse": report.mse,
            "mape": report.mape,
            "mape_excluded": report.mape_excluded,
            "mape_reason": report.mape_reason,
            "r2": report.r2,
            "r2_reason": report.r2_reason,
            "n": report.n,
        },
    )


def _cmd_study(args) -> None:
    config = _load_config(args)
    series = _read_series_csv(args.infile)
    models = _parse_models(args.models)
    horizons = _parse_horizons(args.horizons)
    result = horizon_study(
        models,
        series,
        horizons,
        config=config,
        repetitions=args.reps,
        base_seed=args.seed if args.seed is not None else config.seed,
    )
    header = ["History:Future"]
    for name in models:
        header.extend([f"{name}_mse", f"{name}_mape", f"{name}_r2"])
    rows = []
    for hist, hor in horizons:
        row = [f"{hist}:{hor}"]
        for name in models:
            cell = result.cell(name, hist, hor)
            row.extend([_fmt(cell.mse), _fmt(cell.mape), _fmt(cell.r2)])
        rows.append(row)
    _write_csv(args.out, header, rows)


def _bundle_qps_forecaster(bundle_path: str):
    bundle = load_bundle(bundle_path)
    h = bundle.config.history_len
    stats = bundle.stats

    def forecast(history, steps):
        hist = np.asarray(history, dtype=float)
        # too little history raises, which simulate() counts as a fallback
        z = (hist[-h:] - stats.mean) / stats.std
        predicted = temposcale_predict(bundle, z).denormalized()
        if steps > len(predicted):
            raise ValueError("prediction cycle exceeds the bundle horizon")
        return predicted[:steps]

    return forecast


def _cmd_simulate(args) -> None:
    trace = _read_series_csv(args.trace)
    profile_rows = _read_csv(args.profile, ("qps", "cpu_milli"))
    curve = fit_profile(profile_rows)
    policy = _load_policy(args.policy)
    if args.forecaster == "naive":
        forecaster = naive_qps_forecaster
    elif args.forecaster == "oracle":
        forecaster = OracleQpsForecaster(trace)
    elif args.forecaster == "arima":

        def forecaster(history, steps):
            hist = np.asarray(history, dtype=float)
            model = ar_fit(hist, p=max(1, min(8, len(hist) - 2)), d=1)
            return ar_forecast(model, hist, steps).values

    else:
        if args.bundle is None:
            raise UsageError("--forecaster temposcale requires --bundle")
        forecaster = _bundle_qps_forecaster(args.bundle)

    report = simulate(
        trace,
        forecaster,
        curve,
        policy,
        base_rt_ms=args.base_rt,
        slo_thresholds=_parse_slos(args.slo),
    )
    _write_csv(
        args.out_ticks,
        ["t", "qps", "demand_milli", "alloc_milli", "response_ms"],
        (
            [_fmt(t), _fmt(q), _fmt(d), _fmt(a), _fmt(r)]
            for t, q, d, a, r in zip(
                report.times,
                report.qps,
                report.demand_milli,
                report.alloc_milli,
                report.response_ms,
            )
        ),
    )
    _write_json(
        args.out_report,
        {
            "avg_rt_ms": report.avg_rt,
            "p99_rt_ms": report.p99_rt,
            "max_rt_ms": report.max_rt,
            "slo_violation_rate": {
                _fmt(t): rate for t, rate in report.slo_violation_rate.items()
            },
            "cpu_budget_milli_s": report.cpu_budget,
            "cpu_usage_milli_s": report.cpu_usage,
            "fallback_cycles": report.fallback_cycles,
            "ticks": int(len(report.times)),
        },
    )


def _cmd_profile_fit(args) -> None:
    rows = _read_csv(args.infile, ("qps", "cpu_milli"))
    curve = fit_profile(rows)
    _write_json(args.out, {"knots": [[q, c] for q, c in curve.knots]})


# ---------------------------------------------------------------------------
# parser


def _add_config_flags(sub, seed=True, shape=False):
    sub.add_argument("--config", help="JSON run-configuration file")
    if seed:
        sub.add_argument("--seed", type=int, help="override every RNG seed")
    if shape:
        sub.add_argument("--history-len", dest="history_len", type=int)
        sub.add_argument("--horizon-len", dest="horizon_len", type=int)
        sub.add_argument("--stride", type=int, help="window stride")
        sub.add_argument("--epochs", type=int, help="training epochs per stage")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="temposcale", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("ingest", help="clean a raw monitoring CSV into a series CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--series", required=True, help="service name to extract")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = subs.add_parser("decompose", help="split a series into two modes + residual")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_decompose)

    p = subs.add_parser("train", help="train the full forecaster, save a bundle")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="bundle JSON path")
    _add_config_flags(p, shape=True)
    p.set_defaults(func=_cmd_train)

    p = subs.add_parser("predict", help="forecast one horizon from a saved bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = subs.add_parser("baseline", help="classical baseline forecast")
    p.add_argument("--model", choices=("arima", "naive"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=48)
    p.add_argument("--p", type=int, default=8, help="autoregressive order")
    p.add_argument("--d", type=int, default=1, choices=(0, 1), help="differencing")
    p.set_defaults(func=_cmd_baseline)

    p = subs.add_parser("evaluate", help="score a forecast CSV against actuals")
    p.add_argument("--actual", required=True)
    p.add_argument("--predicted", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(func=_cmd_evaluate)

    p = subs.add_parser("study", help="model x horizon comparison table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--horizons", required=True, help="HISTORY:FUTURE pairs, e.g. 192:48,96:24"
    )
    p.add_argument(
        "--models",
        default="naive,arima,shortterm,longterm,temposcale",
        help="comma-separated model names",
    )
    p.add_argument("--reps", type=int, default=3)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_study)

    p = subs.add_parser("simulate", help="run the autoscaling loop over a QPS trace")
    p.add_argument("--trace", required=True, help="QPS series CSV")
    p.add_argument("--profile", required=True, help="qps,cpu_milli sample CSV")
    p.add_argument(
        "--forecaster",
        choices=("naive", "oracle", "arima", "temposcale"),
        default="naive",
    )
    p.add_argument("--bundle", help="bundle path for --forecaster temposcale")
    p.add_argument("--policy", help="scaling policy JSON")
    p.add_argument("--base-rt", dest="base_rt", type=float, default=40.0)
    p.add_argument("--slo", default="200,250", help="latency thresholds in ms")
    p.add_argument("--out-ticks", dest="out_ticks", required=True)
    p.add_argument("--out-report", dest="out_report", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("profile-fit", help="fit the monotone qps-to-cpu curve")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="curve JSON path")
    p.set_defaults(func=_cmd_profile_fit)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (TemposcaleError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

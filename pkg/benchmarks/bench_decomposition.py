"""Benchmark the compiled envelope kernel against its pure-Python twin.

The cubic-spline envelope construction inside the sifting loop dominates
decomposition runtime, so this compares end-to-end ``emd`` and ``ceemdan``
timings under each backend and checks that both produce the same numbers.

    python3 benchmarks/bench_decomposition.py [--length N] [--repeats K]
"""

import argparse
import time

import numpy as np

from temposcale.decomposition import ceemdan, emd
from temposcale.decomposition import backend
from temposcale.decomposition.ceemdan import CeemdanConfig


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _run(length: int, trials: int, repeats: int) -> None:
    rng = np.random.default_rng(0)
    signal = rng.standard_normal(length)
    config = CeemdanConfig(ensemble_trials=trials, rng_seed=0)

    results: dict[str, dict[str, float]] = {}
    outputs: dict[str, np.ndarray] = {}
    for name in ("python", "cython"):
        try:
            backend.use(name)
        except (ImportError, ValueError):
            print(f"{name:>7}: unavailable, skipping")
            continue
        emd(signal)  # warm up
        emd_time = _best_of(lambda: emd(signal), repeats)
        dec = ceemdan(signal, config)
        ceemdan_time = _best_of(lambda: ceemdan(signal, config), repeats)
        results[name] = {"emd": emd_time, "ceemdan": ceemdan_time}
        parts = (dec.imf_short, dec.imf_long, dec.residual)
        outputs[name] = np.stack([np.asarray(getattr(p, "values", p)) for p in parts])
        print(
            f"{name:>7}: emd {emd_time * 1e3:8.1f} ms   "
            f"ceemdan({trials} trials) {ceemdan_time * 1e3:8.1f} ms"
        )

    if len(results) == 2:
        diff = float(np.max(np.abs(outputs["python"] - outputs["cython"])))
        print(f"\nbackend agreement: max |python - cython| = {diff:.2e}")
        for task in ("emd", "ceemdan"):
            ratio = results["python"][task] / results["cython"][task]
            print(f"speedup ({task}): {ratio:.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--length", type=int, default=2048, help="signal length")
    parser.add_argument("--trials", type=int, default=16, help="ensemble trials")
    parser.add_argument("--repeats", type=int, default=3, help="best-of repeats")
    args = parser.parse_args()
    original = backend.active_backend()
    try:
        _run(args.length, args.trials, args.repeats)
    finally:
        backend.use(original)


if __name__ == "__main__":
    main()

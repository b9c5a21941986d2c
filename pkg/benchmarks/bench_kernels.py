#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the two hot paths on realistic workload shapes: window range
extraction over a long frame track, and full-batch logistic-regression
training on per-unit example matrices. Run directly:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from wordmotion._kernels import available_backends


def time_call(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_window_deltas(mod, values, valid, spans):
    return time_call(lambda: mod.window_deltas(values, valid, spans))


def bench_logreg(mod, problems):
    def run():
        for X, y in problems:
            mod.logreg_fit(
                X, y, lr=0.1, max_iter=2000, tol=1e-6, l2=1e-3, use_intercept=True
            )

    return time_call(run)


def main() -> None:
    rng = np.random.default_rng(0)

    # ~1 hour of 30 fps video, ~4500 word windows of 10-20 frames
    t_frames = 108_000
    values = rng.normal(size=(t_frames, 25))
    valid = (rng.random(t_frames) > 0.02).astype(np.uint8)
    starts = rng.integers(0, t_frames - 30, size=4500)
    spans = np.stack([starts, starts + rng.integers(10, 21, size=4500)], axis=1).astype(
        np.int64
    )

    # 40 per-unit training problems, 200 examples x 25 dims each
    problems = []
    for _ in range(40):
        X = rng.normal(size=(200, 25))
        y = (rng.random(200) > 0.5).astype(np.float64)
        X[y > 0.5, :2] += 1.0  # make them separable enough to train long
        problems.append((np.ascontiguousarray(X), y))

    backends = available_backends()
    print(f"available backends: {', '.join(sorted(backends))}")
    results: dict[str, dict[str, float]] = {}
    for name in sorted(backends):
        mod = backends[name]
        results[name] = {
            "window_deltas": bench_window_deltas(mod, values, valid, spans),
            "logreg_fit": bench_logreg(mod, problems),
        }

    print(f"\n{'kernel':<16}" + "".join(f"{n:>12}" for n in sorted(results)) + f"{'speedup':>10}")
    for kernel in ("window_deltas", "logreg_fit"):
        row = f"{kernel:<16}"
        for name in sorted(results):
            row += f"{results[name][kernel] * 1e3:>10.1f}ms"
        if len(results) == 2:
            ratio = results["python"][kernel] / results["compiled"][kernel]
            row += f"{ratio:>9.1f}x"
        print(row)

    if len(results) < 2:
        print("\ncompiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()

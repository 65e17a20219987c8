"""Benchmark the compiled replicate-reduction kernels against the NumPy
fallback, and report how far apart their results are (should be a few ulps
for the wild kernel, exactly zero for the resampling kernel).

Usage: python benchmarks/bench_kernels.py [--breps B]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from maxboot import _kernels

try:
    from maxboot import _core
except ImportError:
    _core = None


def time_call(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench(n: int, p: int, b: int) -> None:
    rng = np.random.default_rng(0)
    xc = rng.standard_normal((n, p))
    w = rng.standard_normal((b, n))
    idx = rng.integers(0, n, (b, n), dtype=np.int64)

    print(f"\nn={n} p={p} b_reps={b}")
    header = f"{'kernel':22s} {'numpy':>10s} {'ext':>10s} {'speedup':>8s} {'max |diff|':>11s}"
    print(header)
    print("-" * len(header))
    for name, args in (
        ("wild_max_reduce", (xc, w, False)),
        ("resample_max_reduce", (xc, idx, False)),
    ):
        py_fn = getattr(_kernels, name)
        t_py = time_call(py_fn, *args)
        if _core is None:
            print(f"{name:22s} {t_py * 1e3:9.2f}ms {'n/a':>10s}")
            continue
        ext_fn = getattr(_core, name)
        t_ext = time_call(ext_fn, *args)
        diff = float(np.abs(py_fn(*args) - ext_fn(*args)).max())
        print(f"{name:22s} {t_py * 1e3:9.2f}ms {t_ext * 1e3:8.2f}ms {t_py / t_ext:7.2f}x {diff:11.2e}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--breps", type=int, default=500)
    args = parser.parse_args()
    if _core is None:
        print("compiled core not available; showing fallback timings only")
    for n, p in ((200, 100), (200, 400), (1000, 1000)):
        bench(n, p, args.breps)


if __name__ == "__main__":
    main()

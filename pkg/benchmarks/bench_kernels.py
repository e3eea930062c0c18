#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the three hot kernels on benchmark-sized inputs and one small
end-to-end robust training run per backend.

Usage: python benchmarks/bench_kernels.py [--repeats 7]
"""

import argparse
import statistics
import time

import numpy as np

from robustboost import kernels
from robustboost.base_learners import StumpLearner
from robustboost.boosters import train_robustboost
from robustboost.data import gen_mease_wyner
from robustboost.potential import RobustBoostParams


def timeit(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def kernel_cases(rng):
    n, d = 2000, 20
    X = np.ascontiguousarray(rng.random((n, d)))
    order = np.argsort(X, axis=0, kind="stable")
    sorted_vals = np.ascontiguousarray(np.take_along_axis(X, order, axis=0))
    wy = rng.normal(size=n)
    wy_sorted = np.ascontiguousarray(np.take_along_axis(wy[:, None], order, axis=0))
    Xb = np.ascontiguousarray(rng.choice([-1.0, 1.0], (800, 21)))
    wyb = np.ascontiguousarray(rng.normal(size=800))
    m = np.ascontiguousarray(rng.normal(0, 1, n))
    yh = np.ascontiguousarray(rng.choice([-1.0, 1.0], n))
    return {
        "stump_scan (n=2000, d=20)": lambda impl: impl.stump_scan(sorted_vals, wy_sorted),
        "signed_coordinate_scan (n=800, d=21)": lambda impl: impl.signed_coordinate_scan(Xb, wyb),
        "step_residuals (n=2000)": lambda impl: impl.step_residuals(
            m, yh, 0.3, 0.05, 0.2, 1.0, 0.9573747950298639, 0.1
        ),
    }


def train_case(seed=5):
    ds = gen_mease_wyner(1000, 0.1, seed)
    params = RobustBoostParams.solve(0.2, 1.0, 0.1)

    def run():
        train_robustboost(ds, StumpLearner(), params, 60)

    return run


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"active backend: {kernels.backend_name()}")
    print(f"available: {', '.join(backends)}\n")

    rng = np.random.default_rng(0)
    cases = kernel_cases(rng)
    width = max(len(name) for name in cases) + 2
    header = "case".ljust(width) + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for name, call in cases.items():
        medians = {}
        for bname, impl in backends.items():
            call(impl)  # warm up
            medians[bname] = timeit(lambda: call(impl), args.repeats)
        row = name.ljust(width) + "".join(
            f"{medians[b] * 1e6:>10.1f}us" for b in backends
        )
        if "cython" in medians and "numpy" in medians:
            row += f"{medians['numpy'] / medians['cython']:>9.1f}x"
        print(row)

    # end-to-end comparison needs the backend selected at import time, so
    # run the training case only under the active backend and report it
    run = train_case()
    run()
    med = timeit(run, max(3, args.repeats // 2))
    print(f"\ntrain_robustboost (n=1000, stumps, 60 iteration budget), "
          f"{kernels.backend_name()} backend: {med:.3f}s")
    print("re-run with ROBUSTBOOST_BACKEND=numpy (or =cython) to compare "
          "the end-to-end figure under the other backend")


if __name__ == "__main__":
    main()

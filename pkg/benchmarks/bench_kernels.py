#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs both implementations directly (ignoring DEFINETTI_NUMBA) on the hot
paths: the kernel-ratio scan, the mixture count-law construction, and the
compensated region sums.  numba compile time is excluded by a warmup call.

    python benchmarks/bench_kernels.py [-N 1000000] [--repeats 3]
"""

import argparse
import time

import numpy as np

from definetti import _kernels as K
from definetti.numerics import LogFactorialTable


def timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-N", type=int, default=1_000_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    N = args.N

    table = LogFactorialTable()
    table.ensure(N)
    delta = table.delta
    idx = np.arange(N + 1, dtype=np.int64)
    k, alpha = 5, 2
    ps = np.array([0.2, 0.5, 0.9])
    lws = np.log(np.array([0.3, 0.4, 0.3]))
    m1, m2 = 100, N - 1000

    cases = []
    cases.append(
        ("scan_log_ab", lambda f: (lambda: f(delta, N, k, alpha, idx)))
    )
    cases.append(
        ("log_mean_law", lambda f: (lambda: f(delta, N, ps, lws)))
    )
    la, lb = K.scan_log_ab_np(delta, N, k, alpha, idx)
    lq = K.log_mean_law_np(delta, N, ps, lws)
    cases.append(
        ("pair_region_sums", lambda f: (lambda: f(la, lb, lq, idx, m1, m2)))
    )
    mask = (idx > m1) & (idx <= m2)
    cases.append(
        ("max_ratio_dev", lambda f: (lambda: f(la, lb, mask)))
    )

    impls = {
        "scan_log_ab": (K.scan_log_ab_nb, K.scan_log_ab_np),
        "log_mean_law": (K.log_mean_law_nb, K.log_mean_law_np),
        "pair_region_sums": (K.pair_region_sums_nb, K.pair_region_sums_np),
        "max_ratio_dev": (K.max_ratio_dev_nb, K.max_ratio_dev_np),
    }

    print(f"N = {N}, repeats = {args.repeats} (best shown)")
    print(f"{'kernel':<20}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name, make in cases:
        nb_fn, np_fn = impls[name]
        run_np = make(np_fn)
        t_np = timed(run_np, args.repeats)
        if nb_fn is None:
            print(f"{name:<20}{'n/a':>12}{t_np:>11.3f}s{'-':>10}")
            continue
        run_nb = make(nb_fn)
        run_nb()  # exclude JIT compilation
        t_nb = timed(run_nb, args.repeats)
        print(f"{name:<20}{t_nb:>11.3f}s{t_np:>11.3f}s{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the finite-field kernels: numba @njit vs pure numpy.

Times group-order counting, full point enumeration and N-torsion filtering
over a sweep of primes on the curve y^2 = x^3 - 21x - 20.  The active
library path is chosen by AVSEQ_PURE_NUMPY; this script imports both
implementations directly so a single run compares them side by side.

Usage: python3 benchmarks/bench_fp_kernels.py [--primes p1,p2,...] [--repeat K]
"""

import argparse
import time

import numpy as np

from avseq import fp_kernels as K

CURVE = (0, -21, -20)  # A, B, C of y^2 = x^3 + Ax^2 + Bx + C mod p
DEFAULT_PRIMES = [10007, 100003, 1000003]
TORSION_N = 12


def _time(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--primes", default=",".join(str(p) for p in DEFAULT_PRIMES))
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    primes = [int(p) for p in args.primes.split(",")]

    if not K.HAVE_NUMBA:
        print("numba is not importable; only the numpy path is timed")

    rows = []
    for p in primes:
        A, B, C = (c % p for c in CURVE)
        entry = {"p": p}

        t_np, n_np = _time(K.order_count_np, p, A, B, C, repeat=args.repeat)
        entry["order numpy"] = t_np
        if K.HAVE_NUMBA:
            K.order_count_nb(p, A, B, C)  # compile once
            t_nb, n_nb = _time(K.order_count_nb, p, A, B, C, repeat=args.repeat)
            assert n_np == n_nb, "paths disagree on the group order"
            entry["order numba"] = t_nb

        t_np, pts_np = _time(K.all_points_np, p, A, B, C, repeat=args.repeat)
        entry["enum numpy"] = t_np
        if K.HAVE_NUMBA:
            K.all_points_nb(p, A, B, C)
            t_nb, pts_nb = _time(K.all_points_nb, p, A, B, C, repeat=args.repeat)
            assert np.array_equal(pts_np[0], pts_nb[0])
            entry["enum numba"] = t_nb

        xs, ys = pts_np
        t_np, mask_np = _time(K.killed_by_np, p, A, B, C, TORSION_N, xs, ys,
                              repeat=args.repeat)
        entry["torsion numpy"] = t_np
        if K.HAVE_NUMBA:
            K.killed_by_nb(p, A, B, C, TORSION_N, xs, ys)
            t_nb, mask_nb = _time(K.killed_by_nb, p, A, B, C, TORSION_N, xs, ys,
                                  repeat=args.repeat)
            assert np.array_equal(mask_np, mask_nb)
            entry["torsion numba"] = t_nb
        rows.append(entry)

    cols = ["p", "order numpy", "order numba", "enum numpy", "enum numba",
            "torsion numpy", "torsion numba"]
    cols = [c for c in cols if any(c in r for r in rows)]
    header = "  ".join(f"{c:>14}" for c in cols)
    print(header)
    print("-" * len(header))
    for r in rows:
        cells = []
        for c in cols:
            v = r.get(c)
            cells.append(f"{v:>14}" if isinstance(v, int) else
                         (f"{v * 1000:>12.2f}ms" if v is not None else " " * 14))
        print("  ".join(cells))
    if K.HAVE_NUMBA:
        speedups = [r["order numpy"] / r["order numba"] for r in rows]
        print(f"\norder-count speedup numba vs numpy: "
              f"{min(speedups):.1f}x .. {max(speedups):.1f}x")


if __name__ == "__main__":
    main()

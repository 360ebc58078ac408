"""Compare the compiled and the pure-numpy permutation kernels.

Usage: python3 benchmarks/bench_backends.py [--B 20000] [--repeat 3]

Both backends produce identical counts for the same plan; this script checks
that and reports wall time per statistic.
"""

import argparse
import time

import numpy as np

from pairmct import PermutationPlan, from_arrays, permutation_test
from pairmct._accel import HAVE_NUMBA
from pairmct.permutation import REGISTRY, native_scheme


def make_sample(seed=1, n=60, r=0.2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    x[rng.random((n, 2)) < r] = np.nan
    return from_arrays(x[:, 0], x[:, 1])


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--B", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sample = make_sample()
    print(f"n_c={sample.n_c} n_1={sample.n_1} n_2={sample.n_2} B={args.B}")
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'statistic':24s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name in REGISTRY:
        plan = PermutationPlan(native_scheme(name), args.B, 11)
        times, counts = [], []
        for b in backends:
            if b == "numba":  # compile outside the timing
                permutation_test(name, sample, PermutationPlan(plan.scheme, 10, 0), backend=b)
            t, res = timed(lambda: permutation_test(name, sample, plan, backend=b), args.repeat)
            times.append(t)
            counts.append(res.counts)
        if len(counts) > 1 and counts[0] != counts[1]:
            raise SystemExit(f"{name}: backends disagree {counts}")
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{name:24s}" + "".join(f"{t:11.4f}s" for t in times) + f" {speed}")


if __name__ == "__main__":
    main()

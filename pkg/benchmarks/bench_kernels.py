"""Time the compiled and pure-Python sweep kernels on the same problems.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints per-sweep and per-solve wall times and checks that both backends
return identical arrays.
"""

import argparse
import time

import numpy as np

from ecodrive import kernels
from ecodrive.kernels import ModeTable, sweep
from ecodrive.route import KMH
from ecodrive.solver import CostWeights, SegmentProblem, solve_costate
from ecodrive.vehicle import TruckConfig


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    cfg = TruckConfig()
    table = ModeTable.build(cfg)
    w = CostWeights.from_phi(15)
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'case':<24}{'backend':<10}{'seconds':>12}{'speedup':>10}")
    for n in (1000, 4000):
        ds = 1000.0 / n
        args_ = (table, n, 60 * KMH, -40.0, ds, w.w_f, w.w_t, 40.0, 0.5)
        times = {b: best_of(lambda b=b: sweep(*args_, backend=b), args.repeat) for b in backends}
        if len(backends) == 2:
            a, b = (sweep(*args_, backend=x) for x in backends)
            same = all(np.array_equal(x, y, equal_nan=True) for x, y in zip(a[2:], b[2:]))
            assert same and a[:2] == b[:2], "backends disagree"
        for b in backends:
            print(f"{'sweep N=' + str(n):<24}{b:<10}{times[b]:>12.5f}{times['python'] / times[b]:>10.1f}")
    prob = SegmentProblem(0.0, 1000.0, 80 * KMH, 60 * KMH, 4000, w)
    times = {b: best_of(lambda b=b: solve_costate(cfg, prob, backend=b), max(1, args.repeat // 5))
             for b in backends}
    for b in backends:
        print(f"{'solve N=4000':<24}{b:<10}{times[b]:>12.5f}{times['python'] / times[b]:>10.1f}")


if __name__ == "__main__":
    main()

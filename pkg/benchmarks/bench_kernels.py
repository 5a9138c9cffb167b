"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 20000] [--d 3] [--repeat 3]

Both backends are fed the same seed, so the script also checks that they
return identical results.
"""

import argparse
import time

import numpy as np

from pushspread import _pykernels

try:
    from pushspread import _kernels
except ImportError:
    _kernels = None


def bg(seed):
    return np.random.PCG64(seed)


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(n, d):
    def pair(k):
        return lambda: k.pair_clones(n * d, bg(1))

    def static(k):
        ends = _pykernels.pair_clones(n * d, bg(2)).reshape(n, d) // d
        return lambda: k.static_run(ends, 0, bg(3), 10**6)[1]

    def incr(k):
        return lambda: k.incremental_run(n, d, bg(4), True, 10**6)["rounds"]

    def batch(k):
        return lambda: k.batch_incremental_T(8, 3, 2000, bg(5), True, 1000, 10**6)[0]

    return [("pair_clones", pair), ("static_run", static), ("incremental_run", incr),
            ("batch_incremental_T n=8", batch)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; nothing to compare")
        return
    print(f"n={args.n} d={args.d} best of {args.repeat}")
    print(f"{'kernel':<26}{'cython s':>12}{'python s':>12}{'speedup':>10}  same")
    for name, make in cases(args.n, args.d):
        tc, oc = timed(make(_kernels), args.repeat)
        tp, op = timed(make(_pykernels), 1)
        same = np.array_equal(np.asarray(oc), np.asarray(op))
        print(f"{name:<26}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}  {same}")


if __name__ == "__main__":
    main()

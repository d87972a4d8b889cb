"""Times the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fracflow import _kernels_py

try:
    from fracflow import _kernels as compiled
except ImportError:
    compiled = None


def cases(rng):
    # history sums as in a 160-step run with 24k scalar unknowns (level 5, RT1)
    N, ns = 160, 24_576
    w = rng.standard_normal(N + 1)
    hist = rng.standard_normal((N + 1, ns))
    out = np.empty(ns)
    yield "history_sum", lambda k: k.history_sum(w, hist, N, out)

    # triplets of a level-5 RT1 flux mass matrix
    nnz, n = 1_500_000, 50_000
    rows = rng.integers(0, n, nnz)
    cols = rng.integers(0, n, nnz)
    vals = rng.standard_normal(nnz)
    yield "coo_to_csr", lambda k: k.coo_to_csr(rows, cols, vals, n, n)

    a = rng.standard_normal((8192, 12))
    b = rng.standard_normal((8192, 12))
    ia = rng.integers(0, 8192, 400_000)
    ib = rng.integers(0, 8192, 400_000)
    res = np.empty(400_000)
    yield "gather_rowdot", lambda k: k.gather_rowdot(a, ia, b, ib, res)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in cases(rng):
        tp = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<15}{tp:>14.2f}{'n/a':>14}{'':>10}")
            continue
        tc = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<15}{tp:>14.2f}{tc:>14.2f}{tp / tc:>9.2f}x")


if __name__ == "__main__":
    main()

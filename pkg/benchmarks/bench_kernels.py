"""Time the compiled kernels against the NumPy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import timeit

import numpy as np

from lancom import _kernels_py
from lancom.sparse import gen_laplacian_L

try:
    from lancom import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    A = gen_laplacian_L(300)
    x = rng.standard_normal(A.n)
    out = np.empty(A.n)
    yield "csr_matvec n=67500", lambda mod: mod.csr_matvec(A.indptr, A.indices, A.data, x, out)
    for order in (60, 220):
        M = rng.standard_normal((order, order))
        M = M + M.T
        yield f"sym_eig order={order}", lambda mod, M=M: mod.sym_eig(M.copy(), True)
        yield f"sym_eig values order={order}", lambda mod, M=M: mod.sym_eig(M.copy(), False)
    d = rng.standard_normal(1000)
    e = rng.standard_normal(999)
    yield "tridiag_smallest n=1000 k=4", lambda mod: mod.tridiag_smallest(d, e, 4, True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<32} {'cython [ms]':>12} {'numpy [ms]':>12} {'speedup':>8}")
    for name, fn in cases(rng):
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<32} {'n/a':>12} {1e3 * t_py:>12.3f} {'':>8}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        print(f"{name:<32} {1e3 * t_c:>12.3f} {1e3 * t_py:>12.3f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()

"""Timing comparison of the residual kernel backends.

Runs the same implicit-step workload (residual evaluations at the shapes the
finite-difference Jacobian produces) against the compiled extension and the
vectorized numpy fallback.  Usage:

    python benchmarks/bench_kernels.py [M ...]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from memsq._kernels import numpy_impl

try:
    from memsq._kernels import _residual as cython_impl
except ImportError:
    cython_impl = None


def workload(M: int) -> tuple:
    rng = np.random.default_rng(7)
    u_prev = 0.3 * np.sin(np.linspace(0.0, np.pi / 2.0, M + 1)) ** 2
    x_prev = np.linspace(0.0, 1.0, M + 1)
    z = np.empty(2 * M)
    z[0] = 0.1
    z[1 : M + 1] = u_prev[:M] + 1e-4 * rng.random(M)
    z[M + 1 :] = x_prev[1:M] + 1e-5 * rng.standard_normal(M - 1)
    out = np.empty(2 * M)
    return out, z, u_prev, x_prev


def bench(impl, M: int, repeats: int) -> float:
    out, z, u_prev, x_prev = workload(M)
    args = (out, z, u_prev, x_prev, 0.0, 1e-3, 1.5, 1.0, 1.0,
            1, False, 1e-2, 1.0, True, 2.0, False)
    impl.residual(*args)  # warm up
    best = np.inf
    for _ in range(5):
        start = time.perf_counter()
        for _ in range(repeats):
            impl.residual(*args)
        best = min(best, (time.perf_counter() - start) / repeats)
    return best


def main() -> None:
    sizes = [int(a) for a in sys.argv[1:]] or [71, 141, 283, 567]
    print(f"{'M':>6} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    for M in sizes:
        repeats = max(200, 20000 // M)
        t_np = bench(numpy_impl, M, repeats)
        if cython_impl is None:
            print(f"{M:>6} {t_np * 1e6:>10.2f}us {'missing':>12} {'-':>9}")
            continue
        t_cy = bench(cython_impl, M, repeats)
        print(
            f"{M:>6} {t_np * 1e6:>10.2f}us {t_cy * 1e6:>10.2f}us {t_np / t_cy:>8.1f}x"
        )


if __name__ == "__main__":
    main()

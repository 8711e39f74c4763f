"""Timing comparison of the compiled and pure-Python kernels.

Run:  python benchmarks/bench_backends.py

Covers the hot paths: support evaluation, closed-form ellipse reflection,
bulk map iteration (rotation numbers), root-finding reflection on generic
tables, and the perimeter gradient driving the variational orbit solver.
"""

import math
import time

import numpy as np

from porism import Ellipse, TrigPoly
from porism import _kernels_py as kpy

try:
    from porism import _kernels as kcy
except ImportError:
    kcy = None


def timeit(fn, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(name, make_fn):
    t_py = timeit(make_fn(kpy))
    if kcy is None:
        print(f"{name:38s} python {t_py*1e3:9.3f} ms   (compiled kernel unavailable)")
        return
    t_cy = timeit(make_fn(kcy))
    print(f"{name:38s} python {t_py*1e3:9.3f} ms   cython {t_cy*1e3:9.3f} ms   {t_py/t_cy:6.1f}x")


def main():
    ellipse = Ellipse(2.0, 1.0).packed()
    table = TrigPoly(1.0, ((2, 0.01, -0.02), (3, 0.04, 0.01), (5, 0.005, -0.01))).packed()
    psis_grid = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
    rng = np.random.default_rng(1)
    psis7 = np.sort(rng.uniform(0.0, 2.0 * math.pi, 7))
    grad = np.empty(7)

    cases = [
        ("support_eval x 100k (ellipse)",
         lambda k: lambda: [k.support_eval(*ellipse, 1.234) for _ in range(100_000)]),
        ("support_batch 4096 x 100 (trig)",
         lambda k: lambda: [k.support_batch(*table, psis_grid) for _ in range(100)]),
        ("iterate_line 100k steps (ellipse)",
         lambda k: lambda: k.iterate_line(*ellipse, 0.3, 1.0, 100_000, False)),
        ("reflect_line x 2000 (trig rootfind)",
         lambda k: lambda: [k.reflect_line(*table, 0.3, 1.0, True) for _ in range(2000)]),
        ("perimeter_grad x 20k (trig, n=7)",
         lambda k: lambda: [k.perimeter_grad(*table, psis7, grad) for _ in range(20_000)]),
    ]
    print(f"numpy {np.__version__}")
    for name, make in cases:
        bench(name, make)


if __name__ == "__main__":
    main()

"""Compare the compiled kernel core with the numpy fallback.

Run ``python benchmarks/bench_core.py [--sizes 512 1024 2048] [--repeat 5]``.
Prints best-of-``repeat`` wall time per routine and the max absolute
difference between the two backends.
"""
import argparse
import math
import time

import numpy as np

from lapconv import _fallback
from lapconv.metric_space import make_rng

try:
    from lapconv import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n):
    rng = make_rng(1, n)
    x = rng.uniform(0.0, 2 * math.pi, n)
    t = rng.uniform(0.0, 1.0, (n, 2))
    k = _fallback.kernel_matrix_1d(x, x, 2 * math.pi, 0, math.pi / 4, 0.0, 1.0 / n)
    inv = 1.0 / k.sum(axis=1)
    return {
        "ball_circle": lambda m: m.kernel_matrix_1d(x, x, 2 * math.pi, 0, math.pi / 4, 0.0, 1.0 / n),
        "gauss_circle": lambda m: m.kernel_matrix_1d(x, x, 2 * math.pi, 1, 0.05, 0.0, 1.0 / n),
        "trunc_torus": lambda m: m.kernel_matrix_torus(t, t, 1.0, 1.0, 2, 0.01, 0.2, 1.0 / n),
        "degree_scale": lambda m: m.symmetric_degree_scale(k, inv, inv),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[512, 1024, 2048])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled core not built; only the fallback is available")
    print(f"{'routine':<14}{'n':>7}{'python s':>12}{'cython s':>12}{'speedup':>9}{'max diff':>11}")
    for n in args.sizes:
        for name, fn in cases(n).items():
            t_py, out_py = best_of(lambda: fn(_fallback), args.repeat)
            if _core is None:
                print(f"{name:<14}{n:>7}{t_py:>12.4f}{'-':>12}{'-':>9}{'-':>11}")
                continue
            t_cy, out_cy = best_of(lambda: fn(_core), args.repeat)
            diff = float(np.max(np.abs(out_py - out_cy)))
            print(f"{name:<14}{n:>7}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()

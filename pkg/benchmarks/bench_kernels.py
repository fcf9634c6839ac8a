"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Also checks that both backends return bit-identical results.
"""

import argparse
import sys
import timeit

import numpy as np

from fou_sheet import _kernels_py

try:
    from fou_sheet import _kernels_c
except ImportError:
    _kernels_c = None


def cases(rng):
    x = rng.uniform(0.0, 25.0, size=4096)
    yield "j0_series_dd, 4096 points", "j0_series_dd", (x, 1e-17)
    for n in (16, 32, 64):
        g = rng.standard_normal((n, n))
        d = rng.standard_normal((n, n))
        yield f"causal_conv2d, {n}x{n}", "causal_conv2d", (g, d)


def best_time(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}  identical")
    for label, name, fargs in cases(rng):
        py, c = getattr(_kernels_py, name), getattr(_kernels_c, name)
        same = np.array_equal(py(*fargs), c(*fargs))
        tp = best_time(py, fargs, args.repeat)
        tc = best_time(c, fargs, args.repeat)
        print(f"{label:32s} {tp * 1e3:12.3f} {tc * 1e3:12.3f} {tp / tc:8.1f}  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled kernels against the numpy/scipy fallback.

Run with ``python benchmarks/bench_kernels.py``. Also reports one full
radial solve and one tensor-grid solve per backend; each backend runs in a
fresh interpreter because the choice is fixed at import.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from egps import _fallback

try:
    from egps import _kernels
except ImportError:  # extension not built
    _kernels = None


def _tridiag(n, rng):
    lo, up = -rng.uniform(0, 1, n), -rng.uniform(0, 1, n)
    lo[0] = up[-1] = 0.0
    return lo, np.abs(lo) + np.abs(up) + 1.0, up, rng.standard_normal(n)


def _best(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    cases = []
    for n in (64, 2048, 65536):
        lo, di, up, b = _tridiag(n, rng)
        cases.append((f"thomas n={n}", "thomas", (lo, di, up, b)))
        cases.append((f"tridiag_matvec n={n}", "tridiag_matvec", (lo, di, up, b)))
    for shape in ((256, 256), (48, 48, 48)):
        size = int(np.prod(shape))
        args = (rng.uniform(1, 2, size), rng.standard_normal(size), shape,
                (-0.5,) * len(shape))
        cases.append((f"stencil_apply {shape}", "stencil_apply", args))

    print(f"{'kernel':32s} {'python [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for label, name, args in cases:
        slow = _best(lambda: getattr(_fallback, name)(*args), repeat)
        if _kernels is None:
            print(f"{label:32s} {slow * 1e6:12.1f} {'-':>12s} {'-':>8s}")
            continue
        fast = _best(lambda: getattr(_kernels, name)(*args), repeat)
        print(f"{label:32s} {slow * 1e6:12.1f} {fast * 1e6:12.1f} {slow / fast:8.2f}")


_SOLVE_SNIPPET = """
import time
from egps._backend import BACKEND
from egps.gflow import solve
from egps.grid import TensorGrid
from egps.model import ModelParams
from egps.radial import RadialGrid
t = time.perf_counter()
r = solve(ModelParams(3, -10.0, 0.1), RadialGrid(3, 1.0, 2048))
t1 = time.perf_counter() - t
t = time.perf_counter()
g = solve(ModelParams(2, -10.0, 0.1, 20.0), TensorGrid(2, ((-1, 1), (-1, 1)), (128, 128)))
t2 = time.perf_counter() - t
print(f"{BACKEND:8s} radial M=2048: {t1:6.2f} s ({r.iterations} its)   "
      f"tensor 128^2: {t2:6.2f} s ({g.iterations} its)")
"""


def solve_table():
    for flag in ("0", "1"):
        env = dict(os.environ, EGPS_PURE_PYTHON=flag)
        subprocess.run([sys.executable, "-c", _SOLVE_SNIPPET], env=env, check=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-solves", action="store_true")
    args = ap.parse_args(argv)
    kernel_table(args.repeat)
    if not args.skip_solves:
        print(flush=True)
        solve_table()


if __name__ == "__main__":
    main()

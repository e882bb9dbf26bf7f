"""Compare the numba and numpy backends of the Newton kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

The first numba call of each kernel compiles (or loads the on-disk cache);
that warm-up is timed separately and left out of the steady-state numbers.
"""

import argparse
import time

import numpy as np

from segre_lines import _kernels
from segre_lines.generators import random_curve
from segre_lines.lines import _term_arrays, clebsch_cubic, find_real_lines, random_quintic
from segre_lines.secants import SolverConfig, secants_numeric


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases():
    C3 = random_curve(3, np.random.default_rng(1))
    C4 = random_curve(4, np.random.default_rng(2))
    cubic = clebsch_cubic()
    quintic = random_quintic(np.random.default_rng(7))
    exps, coeffs = _term_arrays(quintic)
    W = np.random.default_rng(0).normal(size=(20000, 5))
    one = SolverConfig(seed=1, threads=1)
    return [
        ("secants n=3 (500 starts)", lambda: secants_numeric(C3, one, raise_on_fail=False)),
        ("secants n=4 (500 starts)", lambda: secants_numeric(C4, one, raise_on_fail=False)),
        ("lines, Clebsch cubic", lambda: find_real_lines(cubic, SolverConfig(seed=1, threads=1, starts=200))),
        ("quintic value+gradient, 20k points", lambda: _kernels.poly_val_grad(exps, coeffs, W)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = []
    for name, fn in cases():
        out = {}
        for backend in ("numba", "numpy"):
            _kernels.set_backend(backend)
            t0 = time.perf_counter()
            fn()
            warm = time.perf_counter() - t0
            out[backend] = (warm, _time(fn, args.repeat))
        rows.append((name, out))
    w = max(len(r[0]) for r in rows)
    print(f"{'case':<{w}}  {'numba':>9}  {'numpy':>9}  {'speedup':>7}  {'numba warm-up':>13}")
    for name, out in rows:
        nb, np_ = out["numba"][1], out["numpy"][1]
        print(f"{name:<{w}}  {nb:9.3f}  {np_:9.3f}  {np_ / nb:7.1f}x  {out['numba'][0]:13.3f}")


if __name__ == "__main__":
    main()

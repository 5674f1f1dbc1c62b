"""Time the compiled core against the numpy fallback on the hot kernels.

Run from the repository root after installing the package:

    python benchmarks/bench_backends.py [--repeat 5] [--json results.json]

Every row reports the best wall time over the repeats for both backends,
the speed-up and the largest absolute difference between their outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from rmtkernels import _backend
from rmtkernels.sampling import RngState, sample_ginibre


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def max_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype == bool:
        return float(np.count_nonzero(a != b))
    return float(np.max(np.abs(a - b)))


def cases():
    z = np.linspace(-40.0, 60.0, 20000) + 1j * np.linspace(-30.0, 30.0, 20000)
    yield "loggamma_array n=20000", lambda k: k.loggamma_array(z)

    x = np.linspace(0.01, 300.0, 2000)
    lg = math.lgamma(1.5)
    yield "laguerre_table n=200 x=2000", lambda k: k.laguerre_table(200, 0.5, x, lg)

    for n in (100, 400):
        g = sample_ginibre(n, 2 * n, RngState(3))
        h = g @ g.conj().T
        yield f"householder_tridiagonal N={n}", lambda k, h=h: k.householder_tridiagonal(h)
        d, e = _backend.get("python").householder_tridiagonal(h)
        yield f"tridiagonal_eigenvalues N={n}", lambda k, d=d, e=e: k.tridiagonal_eigenvalues(d, e)[0]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", help="also write the results to this file")
    args = parser.parse_args(argv)

    if "compiled" not in _backend.available():
        print("compiled core is not importable; build it with `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    compiled, python = _backend.get("compiled"), _backend.get("python")

    rows = []
    print(f"{'case':34s} {'compiled [s]':>13s} {'python [s]':>12s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, run in cases():
        tc = best_of(lambda: run(compiled), args.repeat)
        tp = best_of(lambda: run(python), args.repeat)
        diff = max_diff(run(compiled), run(python))
        rows.append({"case": name, "compiled": tc, "python": tp, "speedup": tp / tc, "max_diff": diff})
        print(f"{name:34s} {tc:13.5f} {tp:12.5f} {tp / tc:9.1f} {diff:11.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())

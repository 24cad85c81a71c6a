"""Time the Adams kernel on both backends.

    python benchmarks/bench_adams.py [--steps 1000] [--batch 1 16 256] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from roughheston import _kernels
from roughheston.frac_grid import TimeGrid
from roughheston.riccati import _weights, riccati_coefficients
from roughheston.validation import PAPER_PARAMS


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--batch", type=int, nargs="+", default=[1, 16, 256])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    grid = TimeGrid(1.0, args.steps)
    diag, c, a0, b = _weights(PAPER_PARAMS.alpha, grid.delta, grid.n_steps)
    backends = {"numpy": _kernels.adams_numpy}
    if _kernels.HAVE_NUMBA:
        backends["numba"] = _kernels.adams_numba
    print(f"steps={args.steps} repeat={args.repeat} (best wall time, seconds)")
    print(f"{'batch':>6} " + " ".join(f"{name:>10}" for name in backends) + "   max|diff|")
    for na in args.batch:
        a = np.linspace(-5.0, 5.0, na).astype(complex)
        c0, c1, c2 = (np.ascontiguousarray(x, dtype=complex) for x in riccati_coefficients(PAPER_PARAMS, a))
        call = lambda f: f(c0, c1, c2, b, c, a0, diag, grid.n_steps)  # noqa: E731
        outs = {name: call(f)[0] for name, f in backends.items()}  # also warms the JIT
        times = {name: _best_of(lambda f=f: call(f), args.repeat) for name, f in backends.items()}
        diff = max(np.max(np.abs(o - outs["numpy"])) for o in outs.values())
        print(f"{na:>6} " + " ".join(f"{times[n]:>10.4f}" for n in backends) + f"   {diff:.2e}")


if __name__ == "__main__":
    main()

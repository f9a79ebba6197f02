#!/usr/bin/env python3
"""Benchmark the numba sweep kernels against the pure-numpy fallback.

Runs a fixed number of solver steps per case on representative grids and
prints per-step wall times plus the speedup.  Select cases with --cases and
adjust the workload with --steps.

Example:
    python benchmarks/bench_backends.py --steps 30
"""

import argparse
import time

import numpy as np

from hjplatoon import (
    ActuationBounds,
    ConstraintBox,
    DisturbanceModel,
    Grid,
    IdmParams,
    SolverSettings,
    initialize,
    step,
)
from hjplatoon._backend import numba_available

CASES = {
    "2d-161": ("two-car grid 161x161, extreme",
               Grid(lo=[-4.0, -12.0], hi=[44.0, 12.0], shape=(161, 161)),
               DisturbanceModel.extreme()),
    "4d-21-extreme": ("three-car grid 21^4, extreme",
                      Grid(lo=[-4.0, -12.0, -4.0, -12.0],
                           hi=[44.0, 12.0, 44.0, 12.0], shape=(21,) * 4),
                      DisturbanceModel.extreme()),
    "4d-21-reaction": ("three-car grid 21^4, reaction-time",
                       Grid(lo=[-4.0, -12.0, -4.0, -12.0],
                            hi=[44.0, 12.0, 44.0, 12.0], shape=(21,) * 4),
                       DisturbanceModel.reaction_time(IdmParams())),
    "4d-41-reaction": ("three-car grid 41^4, reaction-time",
                       Grid(lo=[-4.0, -12.0, -4.0, -12.0],
                            hi=[44.0, 12.0, 44.0, 12.0], shape=(41,) * 4),
                       DisturbanceModel.reaction_time(IdmParams())),
}


def time_backend(grid, model, backend, steps):
    bounds = ActuationBounds()
    box = ConstraintBox()
    settings = SolverSettings()
    field = initialize(grid, box)
    # warm-up step covers jit compilation and page faults
    field, _ = step(field, settings, model, bounds, box, backend=backend)
    t0 = time.perf_counter()
    for _ in range(steps):
        field, _ = step(field, settings, model, bounds, box, backend=backend)
    elapsed = time.perf_counter() - t0
    return elapsed / steps, field


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20,
                        help="timed steps per case (default 20)")
    parser.add_argument("--cases", nargs="*", default=["2d-161", "4d-21-extreme",
                                                       "4d-21-reaction"],
                        choices=sorted(CASES), help="cases to run")
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if numba_available() else [])
    if "numba" not in backends:
        print("numba not importable; timing the numpy path only")

    print(f"{'case':<16} {'nodes':>9} " +
          " ".join(f"{b + ' ms/step':>16}" for b in backends) +
          ("  speedup" if len(backends) == 2 else ""))
    for name in args.cases:
        label, grid, model = CASES[name]
        per = {}
        check = {}
        for backend in backends:
            per[backend], field = time_backend(grid, model, backend, args.steps)
            check[backend] = field.values
        row = f"{name:<16} {grid.n_nodes:>9} " + " ".join(
            f"{per[b] * 1e3:>16.2f}" for b in backends
        )
        if len(backends) == 2:
            row += f"  {per['numpy'] / per['numba']:>6.1f}x"
            drift = float(np.max(np.abs(check["numpy"] - check["numba"])))
            if drift > 1e-12:
                row += f"  (WARNING: backends drift by {drift:.2e})"
        print(row)


if __name__ == "__main__":
    main()

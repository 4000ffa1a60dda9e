#!/usr/bin/env python3
"""Time one solver step: jitted kernel vs pure-numpy fallback.

The two kernels produce identical updates; this script measures what the
fused jitted sweep buys over the vectorized numpy + LAPACK path as the grid
grows.  Run from the repository root after installing the package:

    python benchmarks/benchmark_step.py --nodes 257,1025,4097,16385
"""

import argparse
import math
import time

import numpy as np

from degenchem import kernels, make_params, make_sgrid
from degenchem.solver import _stencils


def best_of(fn, args, reps):
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", default="257,1025,4097",
                    help="comma-separated grid sizes")
    ap.add_argument("--reps", type=int, default=200,
                    help="repetitions per kernel (best time wins)")
    ap.add_argument("--theta", type=float, default=0.5,
                    help="implicitness weight of the diffusion solve")
    ap.add_argument("--grading", default="geometric",
                    choices=("uniform", "geometric"))
    args = ap.parse_args()

    params = make_params(2, 1.0, 1.0, math.pi)
    sizes = [int(tok) for tok in args.nodes.split(",") if tok.strip()]

    print(f"theta={args.theta} grading={args.grading} reps={args.reps} "
          f"numba={'yes' if kernels.NUMBA_AVAILABLE else 'NO (numpy only)'}")
    header = f"{'nodes':>8} {'numpy ms':>10}"
    if kernels.NUMBA_AVAILABLE:
        header += f" {'numba ms':>10} {'speedup':>8}"
    print(header)

    for n_nodes in sizes:
        grid = make_sgrid(params.s_max, n_nodes, args.grading)
        s, h, kappa, cL, cC, cR = _stencils(grid, params)
        w = params.mu / params.n * s
        dt = 0.5 * float(np.min(h)) / (params.n * params.w_max)
        call = (w, s, h, kappa, cL, cC, cR, params.n, params.mu, 0.0, dt,
                args.theta, 0.0, params.w_max)

        t_numpy = best_of(kernels.step_numpy, call, args.reps)
        line = f"{n_nodes:>8} {t_numpy * 1e3:>10.4f}"
        if kernels.NUMBA_AVAILABLE:
            kernels.step_numba(*call)  # compile before timing
            t_numba = best_of(kernels.step_numba, call, args.reps)
            line += f" {t_numba * 1e3:>10.4f} {t_numpy / t_numba:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()

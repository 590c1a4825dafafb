#!/usr/bin/env python3
"""Benchmark the compiled window-table kernel against the numpy fallback.

Times the dominant sweep computation (reduced-covariance tables over a
time/temperature grid) for desk- and paper-sized chains, then the
derived per-cell evaluation. Run after building the extension:

    python benchmarks/bench_kernels.py [--repeats 3]
"""

import argparse
import time

import numpy as np

import chainbath as cb
from chainbath import _core_py, kernels, sweep


def build_case(n_half, n_times, n_temps, attachment):
    params = cb.ModelParams(N=n_half, attachment=attachment)
    ctx = sweep.prepare_run(params)
    der = ctx.derived
    times = np.linspace(0.6 * der.t_rev, 0.95 * der.t_rev, n_times)
    t_grid = tuple(np.linspace(0.0, 2.0, n_temps))
    wq, wp = sweep.thermal_weight_table(ctx.bath_modes, t_grid)
    return ctx, (ctx.coupled_modes.frequencies, ctx.o1, ctx.o2, ctx.overlap, times, wq, wp)


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    backends = [("python", _core_py.window_tables)]
    try:
        from chainbath import _core

        backends.append(("cython", _core.window_tables))
    except ImportError:
        print("compiled extension not built; benchmarking the fallback only")

    cases = [
        ("desk edge 2N=300", 150, cb.EdgePair(), 992, 9),
        ("desk pair 2N=400", 200, cb.SymmetricPair(s=5), 1219, 9),
        ("large edge 2N=1200", 600, cb.EdgePair(), 992, 9),
    ]
    print(f"active backend: {kernels.BACKEND}; repeats: {args.repeats}")
    print(f"{'case':<22} {'n_t':>5} " + "".join(f"{name:>12}" for name, _ in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for label, n_half, attachment, n_times, n_temps in cases:
        ctx, kernel_args = build_case(n_half, n_times, n_temps, attachment)
        row = f"{label:<22} {n_times:>5} "
        times = []
        for _, fn in backends:
            best = best_of(lambda: fn(*kernel_args, args.threads), args.repeats)
            times.append(best)
            row += f"{best:>11.3f}s"
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.2f}x"
        print(row)

    # end-to-end: full phase diagram cell assembly from precomputed tables
    ctx, kernel_args = build_case(150, 992, 9, cb.EdgePair())
    mc, ms, md, bath = kernels.window_tables(*kernel_args, args.threads)
    gx, gp = sweep._system_tables(mc, ms, md)
    tables = sweep.WindowTables(
        times=kernel_args[4], T_grid=tuple(range(9)), Gx=gx, Gp=gp, bath=bath
    )

    def all_cells():
        for r in np.linspace(-2, 2, 17):
            for j in range(9):
                sweep._evaluate_cell(tables, float(r), j, 1e-8)

    cell_time = best_of(all_cells, args.repeats)
    print(f"\nper-cell evaluation, 17x9 grid from shared tables: {cell_time:.3f}s")


if __name__ == "__main__":
    main()

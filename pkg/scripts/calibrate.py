#!/usr/bin/env python3
"""Development calibration sweeps for the acceptance configurations.

Not part of the test suite; prints observed success rates, medians, and
timings so the committed configs carry sensible solver settings.
"""

import sys
import time

import numpy as np

from grampa.harness import spec_from_dict, run_experiment, success_rate


def bg_fd(trials=10, beta0=0.5, t_max=1200):
    spec = spec_from_dict(
        {
            "schema_version": 1,
            "kind": "bg-fd",
            "trials": trials,
            "seed_base": 20260801,
            "tuning_grid": [-2.0, 0.0, 2.0, 4.0, 6.0],
            "solver": {"beta0": beta0, "t_max": t_max, "eps": 1e-9},
            "n": 500,
            "sparsity_rate": 0.05,
            "snr_db": 60.0,
            "sampling_ratios": [0.3, 0.5, 0.7],
        }
    )
    t0 = time.perf_counter()
    res = run_experiment(spec, workers=2)
    by = {}
    for r in res:
        by.setdefault(r.sweep["m_over_n"], []).append(r.nsnr_db)
    for k in sorted(by):
        print(f"bg-fd m/n={k}: median {np.median(by[k]):.1f} dB over {len(by[k])}")
    print(f"bg-fd: {time.perf_counter()-t0:.0f}s total")


def ptc_points(trials=20, beta0=0.5, t_max=1500, grid=(2.0, 4.0, 6.0)):
    base = {
        "schema_version": 1,
        "kind": "ptc",
        "trials": trials,
        "seed_base": 20260802,
        "tuning_grid": list(grid),
        "solver": {"beta0": beta0, "t_max": t_max, "eps": 1e-10},
        "n": 200,
        "d_over_n": 1.2,
    }
    spec = spec_from_dict(base)
    for delta, rho in ((0.9, 0.5), (0.1, 0.99)):
        t0 = time.perf_counter()
        rate = success_rate(spec, {"delta": delta, "rho": rho, "d_over_n": 1.2}, workers=2)
        print(f"ptc ({delta},{rho}) D/N=1.2 beta0={beta0} grid={grid}: rate={rate:.2f} ({time.perf_counter()-t0:.0f}s)")


def rho_profiles(trials=10, beta0=0.5, t_max=1500):
    for d_over_n, delta in ((1.2, 0.9), (1.2, 0.3), (1.0, 0.5), (2.0, 0.5)):
        base = {
            "schema_version": 1,
            "kind": "ptc",
            "trials": trials,
            "seed_base": 20260803,
            "tuning_grid": [2.0, 4.0, 6.0],
            "solver": {"beta0": beta0, "t_max": t_max, "eps": 1e-10},
            "n": 200,
            "d_over_n": d_over_n,
        }
        spec = spec_from_dict(base)
        profile = []
        for rho in (0.3, 0.5, 0.7, 0.9, 1.0):
            rate = success_rate(spec, {"delta": delta, "rho": rho, "d_over_n": d_over_n}, workers=2)
            profile.append((rho, rate))
        print(f"ptc profile delta={delta} D/N={d_over_n}: {profile}")


def phantom(trials=5, beta0=0.5, t_max=800, grid=(2.0, 4.0, 6.0)):
    spec = spec_from_dict(
        {
            "schema_version": 1,
            "kind": "phantom",
            "trials": trials,
            "seed_base": 20260804,
            "tuning_grid": list(grid),
            "solver": {"beta0": beta0, "t_max": t_max, "eps": 1e-8},
            "size": 64,
            "line_counts": [8, 12, 16, 22],
            "snr_db": 80.0,
        }
    )
    t0 = time.perf_counter()
    res = run_experiment(spec, workers=2)
    by = {}
    for r in res:
        by.setdefault(r.sweep["lines"], []).append((r.nsnr_db, r.wall_time_s))
    for k in sorted(by):
        dbs = [v[0] for v in by[k]]
        ts = [v[1] for v in by[k]]
        print(f"phantom lines={k}: median {np.median(dbs):.1f} dB, solver time med {np.median(ts):.2f}s")
    print(f"phantom: {time.perf_counter()-t0:.0f}s total")


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    if which in ("bg", "all"):
        bg_fd()
    if which in ("ptc", "all"):
        ptc_points()
    if which in ("profiles", "all"):
        rho_profiles()
    if which in ("phantom", "all"):
        phantom()

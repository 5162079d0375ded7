"""Taylor-Green verification run: closed-form error and temporal self-convergence.

Usage: python scripts/taylor_green_convergence.py [--out OUT_DIR]
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from critns import Grid, SolverConfig, evolve
from critns.fields import random_divfree_field, taylor_green
from critns.norms import lebesgue_norm


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out/taylor_green")
    parser.add_argument("--N", type=int, default=64)
    parser.add_argument("--dt", type=float, default=1e-3)
    args = parser.parse_args()

    grid = Grid(2, args.N)
    cfg = SolverConfig(dt=args.dt, T=1.0, snapshot_stride=200)
    traj = evolve(taylor_green(grid), cfg)
    exact = taylor_green(grid, amplitude=np.exp(-2.0))
    tg_err = float(np.max(np.abs(traj.snapshots[-1].data - exact.data)))
    print(f"Taylor-Green max error at t=1: {tg_err:.3e}")

    u0 = random_divfree_field(Grid(2, 32), seed=7, k_lo=1.0, k_hi=6.0, amplitude=1.0)
    cfgr = SolverConfig(dt=4e-3, T=0.2, snapshot_stride=1000)
    runs = [evolve(u0, replace(cfgr, dt=cfgr.dt / 2**k)) for k in range(3)]
    e1 = lebesgue_norm(runs[0].snapshots[-1] - runs[1].snapshots[-1], 2)
    e2 = lebesgue_norm(runs[1].snapshots[-1] - runs[2].snapshots[-1], 2)
    print(f"self-convergence ratio under dt halving: {e1 / e2:.2f} (4.0 = 2nd order)")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.json", "w") as fh:
        json.dump({"tg_max_error": tg_err, "dt_halving_ratio": e1 / e2}, fh, indent=2)
    print(f"wrote {out / 'results.json'}")


if __name__ == "__main__":
    main()

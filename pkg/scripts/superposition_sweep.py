"""Two-profile superposition sweep: remainder decay along the orthogonality index.

Evolves a synthesized two-bump datum at three sequence indices, subtracts the
superposition of the individually evolved profiles plus the heat flow of the
tail, and tabulates the remainder's intersection-space norm.

Usage: python scripts/superposition_sweep.py [--N 48] [--out OUT_DIR]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from critns import Grid, SolverConfig, evolve
from critns.fields import localized_divfree_bump
from critns.norms import e_norm
from critns.profiles import (
    ProfileSystem,
    default_remainder,
    evolve_system,
    ns_equation_residual,
    remainder,
    remainder_equation_residual,
    synthesize_datum,
)
from critns.scaling import ScaleCore, ScaleCoreSequence
from critns.solver import condition_datum


def build_system(grid):
    L = grid.L
    phi1 = condition_datum(localized_divfree_bump(
        grid, sigma=L / 10, mode_center=(2, 1, 1), seed=11, amplitude=0.25))
    phi2 = condition_datum(localized_divfree_bump(
        grid, sigma=L / 10, mode_center=(2, 1, 1), seed=22, amplitude=0.25))

    def entries(sign):
        out = []
        for n in range(20):
            lam = 1.0 if n < 4 else 2.0 ** (-(n - 3))
            delta = min(0.03 + 0.07 * n, 0.24)
            out.append(ScaleCore(lam, tuple(sign * delta * L * np.ones(3))))
        return ScaleCoreSequence(out)

    rem = default_remainder(grid, seed=33, amplitude=1e-2, decay=0.25)
    return ProfileSystem(profiles=[(phi1, entries(-1)), (phi2, entries(+1))],
                         remainder=rem)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--N", type=int, default=48)
    parser.add_argument("--out", default="out/superposition")
    parser.add_argument("--p", type=float, default=4.0)
    args = parser.parse_args()

    grid = Grid(3, args.N)
    sys_ = build_system(grid)
    sys_.validate()
    cfg = SolverConfig(dt=2e-3, T=0.08, snapshot_stride=4)
    ev = evolve_system(sys_, cfg, [0, 1, 2])
    rows = []
    for n in (0, 1, 2):
        traj = evolve(synthesize_datum(sys_, n), cfg)
        r = remainder(traj, ev, sys_, n)
        row = {
            "n": n,
            "remainder_e_norm": e_norm(r, args.p, args.p, cfg.T),
            "datum_status": traj.status,
        }
        if n == 1:
            row["equation_residual"] = remainder_equation_residual(r, ev, sys_, n)
            row["residual_floor"] = ns_equation_residual(traj)
        rows.append(row)
        print(f"n={n}: remainder E-norm {row['remainder_e_norm']:.4e}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trend.json", "w") as fh:
        json.dump({"p": args.p, "rows": rows}, fh, indent=2)
    print(f"wrote {out / 'trend.json'}")


if __name__ == "__main__":
    main()

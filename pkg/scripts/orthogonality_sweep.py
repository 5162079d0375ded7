"""Cross-term and norm-additivity sweeps over scale ratios and core separations.

Usage: python scripts/orthogonality_sweep.py [--out DIR]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from critns import Grid
from critns.fields import gabor_bump
from critns.grid import RealVectorField
from critns.scaling import ScaleCore, cross_term, norm_additivity_defect


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out/orthogonality")
    args = parser.parse_args()

    grid = Grid(3, 128)
    L = grid.L
    mesh = grid.coordinate_mesh()
    env = np.exp(-sum(x**2 for x in mesh) / (2 * (L / 14) ** 2))
    kmod = 4.0 * 2.0 * np.pi / L
    f = RealVectorField(grid, (env * np.sin(kmod * mesh[0]) ** 3)[None])
    g = gabor_bump(grid, sigma=L / 16, mode_center=(3, 1, 0), ncomp=1)
    ident = ScaleCore.identity(3)

    rows = []
    for lam in (1.0, 1 / 8, 1 / 32):
        sc = ScaleCore(lam, (0.0, 0.0, 0.0))
        rows.append({
            "sweep": "scale", "lambda": lam,
            "cross_term": cross_term(f, g, ident, sc, 3.0),
            "defect": norm_additivity_defect(f, g, ident, sc, 3.0),
        })
    for dsep in (0.02, 0.12, 0.28):
        a = ScaleCore(1.0, tuple(-dsep * L * np.ones(3)))
        b = ScaleCore(1.0, tuple(+dsep * L * np.ones(3)))
        rows.append({
            "sweep": "separation", "separation": 2 * dsep * np.sqrt(3),
            "cross_term": cross_term(f, g, a, b, 3.0),
            "defect": norm_additivity_defect(f, g, a, b, 3.0),
        })
    for row in rows:
        print(row)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.json", "w") as fh:
        json.dump(rows, fh, indent=2)
    print(f"wrote {out / 'sweep.json'}")


if __name__ == "__main__":
    main()

"""Amplitude threshold search: bisection between decay and resolution limit.

Locates the fixed-resolution amplitude bracket for a localized divergence-free
family, and optionally re-runs the search on the dyadically rescaled family
under the parabolically matched configuration to check scaling consistency.

Every report carries the proxy disclaimer: this is a numerical-continuation
threshold, not a statement about true blow-up.

Usage: python scripts/threshold_search.py [--N 64] [--rescale-check] [--out DIR]
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

from critns import Grid, SolverConfig
from critns.criticality import DatumFamily, threshold_bisection
from critns.fields import localized_divfree_bump
from critns.scaling import ScaleCore, apply_lambda


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--N", type=int, default=64)
    parser.add_argument("--tol", type=float, default=0.01)
    parser.add_argument("--rescale-check", action="store_true")
    parser.add_argument("--out", default="out/threshold")
    args = parser.parse_args()

    grid = Grid(3, args.N)
    base = localized_divfree_bump(grid, sigma=grid.L / 20, mode_center=(2, 1, 1),
                                  seed=42, amplitude=1.0)
    cfg = SolverConfig(dt=4e-3, T=0.25, snapshot_stride=8,
                       blowup_sup_threshold=1e4, spectral_tail_threshold=0.02)
    fam = DatumFamily(base=base, alpha_lo=4.0, alpha_hi=64.0)
    rep = threshold_bisection(fam, cfg, tol=args.tol)
    print(f"bracket: [{rep.bracket[0]:.4f}, {rep.bracket[1]:.4f}] "
          f"in {len(rep.probes)} probes")
    print(f"datum L3 at bracket: {rep.datum_l3_norm:.4f}; "
          f"sup critical norm of last completing run: {rep.sup_critical_norm:.4f}")
    print(f"NOTE: {rep.disclaimer_text}")

    results = {"base": rep.to_dict()}
    if args.rescale_check:
        base2 = apply_lambda(base, ScaleCore(2.0, (0.0,) * 3), check_support=False)
        cfg2 = replace(cfg, dt=cfg.dt * 4, T=cfg.T * 4,
                       blowup_sup_threshold=cfg.blowup_sup_threshold / 2,
                       tail_octave_shift=1)
        rep2 = threshold_bisection(DatumFamily(base=base2, alpha_lo=4.0, alpha_hi=64.0),
                                   cfg2, tol=args.tol)
        consistency = abs(rep2.bracket[0] / rep.bracket[0] - 1.0)
        print(f"rescaled bracket: [{rep2.bracket[0]:.4f}, {rep2.bracket[1]:.4f}]; "
              f"consistency {consistency:.2%}")
        results["rescaled"] = rep2.to_dict()
        results["consistency"] = consistency

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "threshold.json", "w") as fh:
        json.dump(results, fh, indent=2)
    print(f"wrote {out / 'threshold.json'}")


if __name__ == "__main__":
    main()

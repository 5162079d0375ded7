"""Resolution-limited blow-up monitors: sup-in-time critical norms, amplitude
threshold search by bisection, and weak-convergence probes.

Every threshold report carries a mandatory disclaimer flag: the bisection
locates a numerical-continuation threshold at fixed resolution, not a maximal
existence time or a true minimal-norm datum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonMonotoneFamilyError
from .fields import gaussian_bump
from .grid import Grid, RealVectorField
from .norms import BesovIndex, besov_norm, lebesgue_norm
from .profiles import pairing_table
from .solver import COMPLETED, NON_FINITE, RESOLUTION_LIMIT, SolverConfig, Trajectory, evolve

PROXY_DISCLAIMER = (
    "resolution-limited numerical threshold at fixed grid and step; "
    "not a statement about true blow-up or maximal existence times"
)


@dataclass(frozen=True)
class DatumFamily:
    """Amplitude family alpha * base over a bracketing amplitude range."""

    base: RealVectorField
    alpha_lo: float
    alpha_hi: float

    def __post_init__(self):
        if not (0 < self.alpha_lo < self.alpha_hi):
            raise DomainError("need 0 < alpha_lo < alpha_hi")

    def member(self, alpha: float) -> RealVectorField:
        return self.base * alpha


@dataclass
class SupNormReport:
    value: float
    time_of_max: float
    completed: bool
    norm_kind: str


def sup_critical_norm(traj: Trajectory, norm_kind: str = "L3",
                      p: float | None = None) -> SupNormReport:
    """Max over snapshots of the chosen critical norm, with its location."""
    if not traj.snapshots:
        raise DomainError("empty trajectory")
    if norm_kind == "L3":
        if traj.grid.d != 3:
            raise DomainError("the L3 critical norm needs d = 3")
        vals = [lebesgue_norm(s, 3) for s in traj.snapshots]
    elif norm_kind == "besov":
        if p is None:
            p = float(traj.grid.d)
        idx = BesovIndex.critical(p, traj.grid.d)
        vals = [besov_norm(s, idx) for s in traj.snapshots]
    else:
        raise DomainError(f"unknown critical norm kind {norm_kind!r}")
    i = int(np.argmax(vals))
    return SupNormReport(value=float(vals[i]), time_of_max=float(traj.times[i]),
                         completed=traj.status == COMPLETED, norm_kind=norm_kind)


@dataclass
class ThresholdReport:
    bracket: tuple
    datum_l3_norm: float | None
    datum_besov_norm: float
    sup_critical_norm: float
    sup_critical_time: float
    probes: list
    config_echo: dict
    proxy_disclaimer: bool = True
    disclaimer_text: str = PROXY_DISCLAIMER

    def to_dict(self) -> dict:
        return {
            "bracket": list(self.bracket),
            "relative_width": self.bracket[1] / self.bracket[0] - 1.0,
            "datum_l3_norm": self.datum_l3_norm,
            "datum_besov_norm": self.datum_besov_norm,
            "sup_critical_norm": self.sup_critical_norm,
            "sup_critical_time": self.sup_critical_time,
            "probes": self.probes,
            "config": self.config_echo,
            "proxy_disclaimer": self.proxy_disclaimer,
            "disclaimer_text": self.disclaimer_text,
        }


def _trips(traj: Trajectory) -> bool:
    return traj.status in (RESOLUTION_LIMIT, NON_FINITE)


def threshold_bisection(fam: DatumFamily, cfg: SolverConfig, tol: float,
                        besov_p: float | None = None) -> ThresholdReport:
    """Geometric bisection between a completing and a resolution-tripping amplitude.

    Monotonicity of the outcome in amplitude is book-kept on every probe; a
    contradictory pair aborts, since nothing guarantees the true boundary is
    monotone in amplitude.
    """
    if not (tol > 0):
        raise DomainError("bracket tolerance must be positive")
    grid = fam.base.grid
    if besov_p is None:
        besov_p = float(grid.d) + 1.0
    probes = []
    max_completing = 0.0
    min_tripping = float("inf")
    last_completing_traj = None

    def probe(alpha: float) -> bool:
        nonlocal max_completing, min_tripping, last_completing_traj
        traj = evolve(fam.member(alpha), cfg)
        tripped = _trips(traj)
        probes.append({"alpha": alpha, "status": traj.status,
                       "final_time": traj.final_time})
        if tripped:
            if alpha < max_completing:
                raise NonMonotoneFamilyError(
                    f"amplitude {alpha} tripped below a completing amplitude "
                    f"{max_completing}; family outcome is not monotone"
                )
            min_tripping = min(min_tripping, alpha)
        else:
            if alpha > min_tripping:
                raise NonMonotoneFamilyError(
                    f"amplitude {alpha} completed above a tripping amplitude "
                    f"{min_tripping}; family outcome is not monotone"
                )
            max_completing = max(max_completing, alpha)
            last_completing_traj = traj
        return tripped

    if probe(fam.alpha_lo):
        raise DomainError(
            f"family invariant violated: member({fam.alpha_lo}) did not complete"
        )
    if not probe(fam.alpha_hi):
        raise DomainError(
            f"family invariant violated: member({fam.alpha_hi}) completed; "
            "no resolution limit inside the amplitude range"
        )
    lo, hi = fam.alpha_lo, fam.alpha_hi
    while hi / lo - 1.0 > tol:
        mid = float(np.sqrt(lo * hi))
        if probe(mid):
            hi = mid
        else:
            lo = mid

    datum = fam.member(lo)
    l3 = lebesgue_norm(datum, 3) if grid.d == 3 else None
    bes = besov_norm(datum, BesovIndex.critical(besov_p, grid.d))
    kind = "L3" if grid.d == 3 else "besov"
    sup = sup_critical_norm(last_completing_traj, norm_kind=kind,
                            p=None if kind == "L3" else besov_p)
    return ThresholdReport(
        bracket=(lo, hi),
        datum_l3_norm=l3,
        datum_besov_norm=bes,
        sup_critical_norm=sup.value,
        sup_critical_time=sup.time_of_max,
        probes=probes,
        config_echo=cfg.echo(),
    )


def make_test_battery(grid: Grid, count: int = 8, seed: int = 7) -> list:
    """Battery of smooth localized vector test functions for weak-convergence probes."""
    rng = np.random.default_rng(seed)
    tests = []
    for i in range(count):
        sigma = grid.L * (0.04 + 0.05 * rng.random())
        center = (rng.random(grid.d) - 0.5) * grid.L * 0.5
        weights = rng.standard_normal(grid.d)
        bump = gaussian_bump(grid, sigma, center=center, ncomp=grid.d)
        data = bump.data * weights[:, None, None] if grid.d == 2 else (
            bump.data * weights[:, None, None, None]
        )
        tests.append(RealVectorField(grid, data))
    return tests


@dataclass
class ProbeReport:
    times: np.ndarray
    pairings: np.ndarray
    all_decaying: bool

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "pairings": [[float(v) for v in row] for row in self.pairings],
            "all_decaying_final_third": self.all_decaying,
        }


def weak_convergence_probe(traj: Trajectory, tests: list) -> ProbeReport:
    """Pairings of every snapshot against the battery, with a late-time decay flag.

    The flag is set when every |pairing| is nonincreasing over the final third
    of the snapshots, up to a 1% slack relative to the largest late pairing
    (sign-crossing pairings wiggle at small amplitude without signaling growth).
    """
    if not tests:
        raise DomainError("test battery must be nonempty")
    for phi in tests:
        if not traj.grid.compatible(phi.grid):
            raise DomainError("test field grid mismatch")
    table = pairing_table(traj, tests)
    k0 = max(0, len(traj.snapshots) - max(2, len(traj.snapshots) // 3))
    tail = np.abs(table[k0:, :])
    slack = 1e-12 + 0.01 * np.max(tail)
    decaying = bool(np.all(np.diff(tail, axis=0) <= slack))
    return ProbeReport(times=np.asarray(traj.times), pairings=table,
                       all_decaying=decaying)

"""Sup-in-time critical norms, threshold bisection and weak-convergence probes."""

import numpy as np
import pytest

from critns import Grid
from critns.criticality import (
    PROXY_DISCLAIMER,
    DatumFamily,
    make_test_battery,
    sup_critical_norm,
    threshold_bisection,
    weak_convergence_probe,
)
from critns.errors import DomainError
from critns.fields import localized_divfree_bump, random_divfree_field
from critns.grid import zero_field
from critns.norms import BesovIndex, besov_norm, lebesgue_norm
from critns.scaling import ScaleCore, apply_lambda
from critns.solver import SolverConfig, Trajectory, evolve, make_heat_trajectory


class TestSupCriticalNorm:
    def test_zero_trajectory(self, grid3):
        traj = make_heat_trajectory(zero_field(grid3), [0.0, 0.1])
        rep = sup_critical_norm(traj, "L3")
        assert rep.value == 0.0

    def test_needs_3d_for_l3(self, grid2):
        traj = make_heat_trajectory(zero_field(grid2, 2), [0.0, 0.1])
        with pytest.raises(DomainError):
            sup_critical_norm(traj, "L3")

    def test_heat_flow_max_at_zero(self, grid3m):
        # critical norms are nonincreasing under the heat flow: each band
        # multiplier is bounded by one
        f = random_divfree_field(grid3m, seed=0, k_hi=4.0)
        traj = make_heat_trajectory(f, np.linspace(0, 0.3, 7))
        for kind, p in (("L3", None), ("besov", 4.0)):
            rep = sup_critical_norm(traj, kind, p=p)
            assert rep.time_of_max == 0.0

    def test_small_data_run_sup_at_zero_and_decaying(self, grid3m):
        u0 = random_divfree_field(grid3m, seed=1, k_lo=1.0, k_hi=4.0, amplitude=0.02)
        traj = evolve(u0, SolverConfig(dt=5e-3, T=1.0, snapshot_stride=40))
        rep = sup_critical_norm(traj, "besov", p=4.0)
        assert rep.time_of_max == 0.0 and rep.completed
        idx = BesovIndex.critical(4.0, 3)
        assert besov_norm(traj.snapshots[-1], idx) < 0.5 * rep.value


class TestThresholdBisection:
    def _family(self, grid, always_completes=False):
        base = localized_divfree_bump(grid, sigma=grid.L / 8, mode_center=(2, 1, 1),
                                      seed=42, amplitude=1.0)
        hi = 0.1 if always_completes else 48.0
        return DatumFamily(base=base, alpha_lo=0.05, alpha_hi=hi)

    def test_family_validation(self, grid3):
        with pytest.raises(DomainError):
            DatumFamily(base=zero_field(grid3), alpha_lo=2.0, alpha_hi=1.0)

    def test_tiny_family_precondition_fails(self, grid3m):
        fam = self._family(grid3m, always_completes=True)
        cfg = SolverConfig(dt=5e-3, T=0.1, spectral_tail_threshold=0.02)
        with pytest.raises(DomainError, match="no resolution limit"):
            threshold_bisection(fam, cfg, tol=0.05)

    def test_linear_hook_never_trips(self, grid3m):
        # pure heat flow cannot push energy into the tail octave
        fam = self._family(grid3m)
        cfg = SolverConfig(dt=5e-3, T=0.1, spectral_tail_threshold=0.02,
                           linear_only=True)
        with pytest.raises(DomainError, match="no resolution limit"):
            threshold_bisection(fam, cfg, tol=0.05)

    def test_bisection_converges(self, grid3m):
        fam = self._family(grid3m)
        cfg = SolverConfig(dt=5e-3, T=0.1, snapshot_stride=5,
                           spectral_tail_threshold=0.02)
        rep = threshold_bisection(fam, cfg, tol=0.05)
        lo, hi = rep.bracket
        assert hi / lo - 1.0 <= 0.05
        assert rep.proxy_disclaimer is True
        assert rep.disclaimer_text == PROXY_DISCLAIMER
        assert rep.datum_l3_norm > 0
        statuses = {p["status"] for p in rep.probes}
        assert statuses == {"Completed", "ResolutionLimit"}

    def test_report_serializes(self, grid3m):
        fam = self._family(grid3m)
        cfg = SolverConfig(dt=5e-3, T=0.1, snapshot_stride=5,
                           spectral_tail_threshold=0.02)
        rep = threshold_bisection(fam, cfg, tol=0.1)
        doc = rep.to_dict()
        assert doc["proxy_disclaimer"] is True
        assert "disclaimer_text" in doc and doc["relative_width"] <= 0.1


class TestWeakConvergenceProbe:
    def test_empty_battery_rejected(self, grid3):
        traj = make_heat_trajectory(zero_field(grid3), [0.0, 0.1])
        with pytest.raises(DomainError):
            weak_convergence_probe(traj, [])

    def test_zero_trajectory(self, grid3):
        traj = make_heat_trajectory(zero_field(grid3), [0.0, 0.1, 0.2])
        rep = weak_convergence_probe(traj, make_test_battery(grid3, count=4))
        assert np.all(rep.pairings == 0.0)
        assert rep.all_decaying

    def test_heat_flow_pairings_decay(self, grid3m):
        f = random_divfree_field(grid3m, seed=2, k_lo=1.0, k_hi=4.0)
        traj = make_heat_trajectory(f, np.linspace(0.0, 1.0, 9))
        rep = weak_convergence_probe(traj, make_test_battery(grid3m, count=8))
        assert rep.all_decaying
        col_max = np.max(np.abs(rep.pairings), axis=1)
        assert np.all(np.diff(col_max[-3:]) < 0)

    def test_concentration_mechanism(self):
        # Lambda-rescaled concentrating snapshots: pairings shrink while the
        # critical norm stays constant (the weak-convergence mechanism)
        grid = Grid(3, 64)
        f = localized_divfree_bump(grid, sigma=grid.L / 10, mode_center=(2, 1, 0),
                                   seed=3, amplitude=1.0)
        lams = [1.0, 0.5, 0.25]
        snaps = [apply_lambda(f, ScaleCore(lam, (0.0, 0.0, 0.0))) for lam in lams]
        traj = Trajectory(grid, np.array([0.0, 0.1, 0.2]), snaps)
        rep = weak_convergence_probe(traj, make_test_battery(grid, count=6, seed=1))
        col_max = np.max(np.abs(rep.pairings), axis=1)
        assert col_max[0] > col_max[1] > col_max[2]
        norms = [lebesgue_norm(s, 3) for s in snaps]
        assert abs(norms[2] - norms[0]) / norms[0] < 0.02

    def test_battery_is_localized_and_deterministic(self, grid3):
        a = make_test_battery(grid3, count=8, seed=7)
        b = make_test_battery(grid3, count=8, seed=7)
        assert len(a) == 8
        for fa, fb in zip(a, b):
            assert np.array_equal(fa.data, fb.data)

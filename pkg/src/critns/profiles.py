"""Profile synthesis, evolution superposition and remainder tracking.

A profile system is a list of divergence-free profiles, each with its own
scale/core sequence (the entry with the identity sequence is the weak-limit
slot), plus a remainder rule producing the small high-frequency tail per
sequence index.  Synthesized data evolve under the full dynamics; the
superposition of individually evolved profiles plus the heat flow of the tail
approximates that evolution, and the difference is the tracked remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SupportOverflowError, TrajectoryCoverageError
from .fields import band_noise
from .grid import (
    Grid,
    RealVectorField,
    _leray_coefficients,
    forward_transform,
    heat_semigroup,
    inverse_transform,
    leray_project,
    spectral_divergence_ratio,
    zero_field,
)
from .lp import low_pass, paraproduct
from .norms import (
    BesovIndex,
    band_profile,
    besov_norm,
    chemin_lerner_norm,
    critical_exponent,
    lebesgue_norm,
)
from .scaling import ScaleCore, ScaleCoreSequence, apply_lambda, orthogonality_check
from .solver import (
    SolverConfig,
    Trajectory,
    _div_pair_flux_hat,
    dealias_mask,
    evolve,
    q_bilinear,
    sample_trajectory,
)


@dataclass
class RemainderRule:
    """Fixed base field scaled by decay^n; the default base is a small
    divergence-free packet in the top resolvable octave."""

    base: RealVectorField
    decay: float = 0.5

    def at(self, n: int) -> RealVectorField:
        return self.base * self.decay**n


def default_remainder(grid: Grid, seed=0, amplitude: float = 1e-2,
                      decay: float = 0.5) -> RemainderRule:
    k_hi = grid.k_max_axis * 2.0 / 3.0
    base = band_noise(grid, k_hi / 2.0, k_hi, seed, ncomp=grid.d,
                      amplitude=amplitude, divergence_free=True)
    return RemainderRule(base=base, decay=decay)


@dataclass
class ProfileSystem:
    """Profiles with their scale/core sequences and the remainder rule."""

    profiles: list  # [(RealVectorField, ScaleCoreSequence), ...]
    remainder: RemainderRule | None = None

    @property
    def J(self) -> int:
        return len(self.profiles) - 1

    @property
    def grid(self) -> Grid:
        return self.profiles[0][0].grid

    def sequence(self, j: int) -> ScaleCoreSequence:
        return self.profiles[j][1]

    def profile(self, j: int) -> RealVectorField:
        return self.profiles[j][0]

    def truncate(self, J: int) -> "ProfileSystem":
        return ProfileSystem(profiles=self.profiles[: J + 1], remainder=self.remainder)

    def validate(self, K: int = 3, divergence_tol: float = 1e-8) -> None:
        for j, (phi, _) in enumerate(self.profiles):
            if phi.ncomp != self.grid.d:
                raise DomainError(f"profile {j} is not a velocity field")
            if spectral_divergence_ratio(phi) > divergence_tol:
                raise DomainError(f"profile {j} is not divergence-free")
        for j in range(len(self.profiles)):
            for jp in range(j + 1, len(self.profiles)):
                verdict = orthogonality_check(self.sequence(j), self.sequence(jp), K)
                if verdict.value == "NotOrthogonal":
                    raise DomainError(
                        f"scale/core sequences of profiles {j} and {jp} are not orthogonal"
                    )

    def remainder_at(self, n: int) -> RealVectorField:
        if self.remainder is None:
            return zero_field(self.grid)
        return self.remainder.at(n)


def _rescaled(f: RealVectorField, sc: ScaleCore, name: str = "field") -> RealVectorField:
    """Dilate/translate and re-project; the projection removes clip dust so the
    parts stay divergence-free at spectral tolerance."""
    return leray_project(apply_lambda(f, sc, name=name))


def synthesize_datum(sys: ProfileSystem, n: int) -> RealVectorField:
    """phi_0-style superposed datum at sequence index n, including the remainder."""
    total = None
    for j, (phi, seq) in enumerate(sys.profiles):
        try:
            part = _rescaled(phi, seq[n], name=f"profile {j}")
        except SupportOverflowError as exc:
            raise SupportOverflowError(f"profile {j} overflows at index {n}: {exc}") from exc
        total = part if total is None else total + part
    total = total + sys.remainder_at(n)
    return total


@dataclass
class ProfileOrdering:
    permutation: list
    finite: list
    products: list


def order_profiles(sys: ProfileSystem, lifespans: list, n_ref: int) -> ProfileOrdering:
    """Stable sort by lambda_{j,n_ref}^2 * T_j ascending (inf sorts last).

    Also returns the set of finite-lifespan indices and the sorted products.
    """
    if len(lifespans) != len(sys.profiles):
        raise DomainError("one lifespan per profile required")
    products = [sys.sequence(j)[n_ref].lam ** 2 * lifespans[j] for j in range(len(lifespans))]
    perm = sorted(range(len(products)), key=lambda j: (products[j], j))
    finite = [j for j in range(len(lifespans)) if np.isfinite(lifespans[j])]
    return ProfileOrdering(permutation=perm, finite=finite,
                           products=[products[j] for j in perm])


@dataclass
class EvolvedSystem:
    """Per-profile evolutions in their native frames plus the ordering data."""

    system: ProfileSystem
    trajectories: list
    lifespans: list
    ordering: ProfileOrdering

    def tau(self, n: int) -> float:
        """Blow-up-proxy horizon min over flagged profiles of lambda^2 T_j."""
        vals = [
            self.system.sequence(j)[n].lam ** 2 * self.lifespans[j]
            for j in self.ordering.finite
        ]
        return min(vals) if vals else float("inf")

    def frame(self, n: int) -> ScaleCore:
        """Scale/core of the first profile in the ordering (the 0-frame)."""
        return self.system.sequence(self.ordering.permutation[0])[n]


def evolve_system(sys: ProfileSystem, cfg: SolverConfig, n_window,
                  n_ref: int | None = None) -> EvolvedSystem:
    """Evolve every profile in its native frame with a parabolically matched step.

    Each profile's horizon covers cfg.T / min_n lambda_{j,n}^2 over the tested
    window, so rescaled lookups never run off the end.
    """
    n_window = list(n_window)
    if n_ref is None:
        n_ref = n_window[0]
    trajectories, lifespans = [], []
    for j, (phi, seq) in enumerate(sys.profiles):
        lam_min = min(seq[n].lam for n in n_window)
        scale = 1.0 / lam_min**2
        # snapshot every step: superposition lookups at t/lambda^2 then hit
        # recorded frames exactly for dyadic lambda^2, avoiding interpolation
        # error in the remainder
        cfg_j = replace(cfg, T=cfg.T * scale, dt=cfg.dt * scale, snapshot_stride=1)
        traj = evolve(phi, cfg_j)
        trajectories.append(traj)
        lifespans.append(traj.final_time if traj.status != "Completed" else float("inf"))
    ordering = order_profiles(sys, lifespans, n_ref)
    return EvolvedSystem(system=sys, trajectories=trajectories,
                         lifespans=lifespans, ordering=ordering)


def superpose_evolution(ev: EvolvedSystem, sys: ProfileSystem, n: int,
                        t: float) -> RealVectorField:
    """Sum of rescaled profile evolutions plus the heat flow of the remainder."""
    tau_n = ev.tau(n)
    if t > tau_n * (1 + 1e-9):
        raise TrajectoryCoverageError(
            f"requested time {t} beyond the blow-up-proxy horizon {tau_n}"
        )
    total = None
    for j, (phi, seq) in enumerate(sys.profiles):
        sc = seq[n]
        native_t = t / sc.lam**2
        part = _rescaled(ev.trajectories[j].at(native_t), sc, name=f"profile {j}")
        total = part if total is None else total + part
    w = heat_semigroup(sys.remainder_at(n), t)
    return total + w


def remainder(u_n: Trajectory, ev: EvolvedSystem, sys: ProfileSystem, n: int,
              horizon: float | None = None) -> Trajectory:
    """r(t) = u_n(t) - superposition(t) on the snapshot grid of u_n."""
    t_max = min(u_n.final_time, ev.tau(n))
    if horizon is not None:
        t_max = min(t_max, horizon)
    times, snaps = [], []
    for t, snap in zip(u_n.times, u_n.snapshots):
        if t > t_max * (1 + 1e-9):
            break
        times.append(float(t))
        snaps.append(snap - superpose_evolution(ev, sys, n, t))
    return Trajectory(grid=u_n.grid, times=np.asarray(times), snapshots=snaps,
                      status=u_n.status, config_echo={"kind": "remainder", "n": n})


def _frame_components(ev: EvolvedSystem, sys: ProfileSystem, n: int, t: float):
    """Rescaled-frame profile fields U^{j,0}(t) and remainder heat flow W(t)."""
    frame = ev.frame(n)
    parts = []
    for j, (phi, seq) in enumerate(sys.profiles):
        sc = seq[n].compose_inverse_of(frame)
        native_t = t * frame.lam**2 / seq[n].lam ** 2
        parts.append(_rescaled(ev.trajectories[j].at(native_t), sc, name=f"profile {j}"))
    w_box = heat_semigroup(sys.remainder_at(n), t * frame.lam**2)
    w = _rescaled(w_box, frame.inverse(), name="remainder")
    return parts, w


def drift_term(ev: EvolvedSystem, sys: ProfileSystem, n: int, t: float) -> RealVectorField:
    """The rescaled-frame drift: sum of frame-transported profile evolutions
    plus the transported remainder heat flow."""
    parts, w = _frame_components(ev, sys, n, t)
    total = w
    for p in parts:
        total = total + p
    return total


def drift_norm(ev: EvolvedSystem, sys: ProfileSystem, n: int, T0: float, p: float,
               n_samples: int = 9) -> float:
    """L^p-in-time B^{s_p + 2/p}_{p,p} norm of the drift over [0, T0]."""
    grid = sys.grid
    sp = critical_exponent(p, grid.d)
    times = np.linspace(0.0, T0, n_samples)
    traj = sample_trajectory(grid, times, lambda t: drift_term(ev, sys, n, t))
    return chemin_lerner_norm(traj, p, BesovIndex(sp + 2.0 / p, p, p))


def source_term(ev: EvolvedSystem, sys: ProfileSystem, n: int, t: float,
                dealias_fraction: float = 2.0 / 3.0):
    """The two-part source of the remainder equation at time t.

    part1 collects the paraproduct piece of the profile/remainder coupling
    (low-frequency profiles carried against the high-frequency remainder);
    part2 collects the remainder self-interaction, the zeta pieces and the
    profile-profile cross terms.  part1 + part2 is the full source.
    """
    grid = sys.grid
    parts, w = _frame_components(ev, sys, n, t)

    pair_sum = None
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            q = q_bilinear(parts[a], parts[b], dealias_fraction)
            pair_sum = q if pair_sum is None else pair_sum + q
    g_profiles = -1.0 * pair_sum if pair_sum is not None else None

    g_ww = -0.5 * q_bilinear(w, w, dealias_fraction)

    u_sum = parts[0]
    for p_ in parts[1:]:
        u_sum = u_sum + p_

    d = grid.d
    mask = dealias_mask(grid, dealias_fraction)
    kmesh = grid.deriv_wavenumber_mesh
    acc_para = np.zeros((d,) + grid.shape, dtype=np.complex128)
    acc_zeta = np.zeros((d,) + grid.shape, dtype=np.complex128)
    for i in range(d):
        for j in range(i, d):
            t_ij, t_ji, pi_ij = paraproduct(grid, u_sum.data[i], w.data[j])
            para = t_ij
            zeta = t_ji + pi_ij
            if j != i:
                t2_ij, t2_ji, pi2 = paraproduct(grid, u_sum.data[j], w.data[i])
                para = para + t2_ij
                zeta = zeta + t2_ji + pi2
            else:
                para = 2.0 * para
                zeta = 2.0 * zeta
            para_hat = forward_transform(para, grid) * mask
            zeta_hat = forward_transform(zeta, grid) * mask
            acc_para[i] += 1j * kmesh[j] * para_hat
            acc_zeta[i] += 1j * kmesh[j] * zeta_hat
            if j != i:
                acc_para[j] += 1j * kmesh[i] * para_hat
                acc_zeta[j] += 1j * kmesh[i] * zeta_hat
    _leray_coefficients(acc_para, grid)
    _leray_coefficients(acc_zeta, grid)
    part1 = RealVectorField(grid, -inverse_transform(acc_para, grid))
    part2 = RealVectorField(grid, -inverse_transform(acc_zeta, grid)) + g_ww
    if g_profiles is not None:
        part2 = part2 + g_profiles
    return part1, part2


def source_norms(ev: EvolvedSystem, sys: ProfileSystem, n: int, T0: float, p: float,
                 n_samples: int = 7) -> dict:
    """Sum-space upper bound: part1 in L^{2p/(p+1)} B^{s_p-1+1/p}, part2 in
    L^{p'} B^{s_p-2/p}; the F-norm bound is their sum."""
    grid = sys.grid
    sp = critical_exponent(p, grid.d)
    pprime = p / (p - 1.0)
    times = np.linspace(0.0, T0, n_samples)
    cache = {t: source_term(ev, sys, n, t) for t in times}
    t1 = sample_trajectory(grid, times, lambda t: cache[t][0])
    t2 = sample_trajectory(grid, times, lambda t: cache[t][1])
    n1 = chemin_lerner_norm(t1, 2.0 * p / (p + 1.0), BesovIndex(sp - 1.0 + 1.0 / p, p, p))
    n2 = chemin_lerner_norm(t2, pprime, BesovIndex(sp - 2.0 / p, p, p))
    return {"paraproduct_part": n1, "zeta_part": n2, "upper_bound": n1 + n2}


@dataclass
class SplittingReport:
    defect: float
    norm_kind: str
    pair_cross_terms: dict
    individual_norms: list
    combined_norm: float


def norm_splitting_check(ev: EvolvedSystem, sys: ProfileSystem, n: int, t_n: float,
                         J_window=None, norm_kind: str = "L3",
                         p: float | None = None) -> SplittingReport:
    """Additivity defect of the critical norm over the rescaled evolved profiles.

    L3 form: |sum_c (||sum_j F_j^c||_3^3 - sum_j ||F_j^c||_3^3)| with the
    component-wise cube convention; the per-pair cross terms
    integral |F_j1| |F_j2|^2 are reported alongside.
    """
    lo, hi = (0, sys.J) if J_window is None else J_window
    fields = []
    for j in range(lo, hi + 1):
        sc = sys.sequence(j)[n]
        fields.append(_rescaled(ev.trajectories[j].at(t_n / sc.lam**2), sc,
                                name=f"profile {j}"))
    grid = sys.grid
    w = grid.cell_volume
    if norm_kind == "L3":
        if grid.d != 3:
            raise DomainError("the L3 splitting form needs d = 3")
        total = fields[0]
        for f in fields[1:]:
            total = total + f
        defect = 0.0
        for c in range(grid.d):
            s_norm = np.sum(np.abs(total.data[c]) ** 3) * w
            parts = sum(np.sum(np.abs(f.data[c]) ** 3) * w for f in fields)
            defect += s_norm - parts
        combined = lebesgue_norm(total, 3)
        individual = [lebesgue_norm(f, 3) for f in fields]
    elif norm_kind == "besov":
        if p is None:
            raise DomainError("the Besov splitting form needs p")
        idx = BesovIndex.critical(p, grid.d)
        total = fields[0]
        for f in fields[1:]:
            total = total + f
        combined = besov_norm(total, idx)
        individual = [besov_norm(f, idx) for f in fields]
        defect = combined**p - sum(v**p for v in individual)
    else:
        raise DomainError(f"unknown norm kind {norm_kind!r}")
    cross = {}
    for a in range(len(fields)):
        for b in range(len(fields)):
            if a != b:
                val = float(np.sum(np.abs(fields[a].data) * fields[b].data**2) * w)
                cross[(lo + a, lo + b)] = val
    return SplittingReport(defect=abs(float(defect)), norm_kind=norm_kind,
                           pair_cross_terms=cross, individual_norms=individual,
                           combined_norm=combined)


def extract_cores(f: RealVectorField, count: int = 1, p: float | None = None):
    """Dominant concentration scale/cores of a field, amplitude-descending.

    The scale estimate is 2^{-j*} for the band j* maximizing the critical-norm
    content 2^{j s_p} ||Delta_j f||_{L^p}; cores are peaks of the low-passed
    magnitude, suppressing a 2-scale neighborhood between picks.  Ties break
    by lexicographic core order.  Returns None for a zero field.
    """
    if f.max_abs() == 0.0:
        return None
    grid = f.grid
    if p is None:
        p = float(grid.d)
    sp = critical_exponent(p, grid.d)
    levels, vals = band_profile(f, p)
    weights = 2.0 ** (levels * sp) * vals
    j_star = int(levels[int(np.argmax(weights))])
    lam_hat = 2.0**-j_star
    smooth = low_pass(f, j_star + 2)
    mag = np.sqrt(np.sum(smooth.data**2, axis=0))
    coords = grid.axis_coords
    out = []
    mag_work = mag.copy()
    mesh = grid.coordinate_mesh()
    for _ in range(count):
        peak = np.max(mag_work)
        if peak <= 0:
            break
        candidates = np.argwhere(mag_work >= peak * (1.0 - 1e-9))
        pts = sorted(tuple(coords[i] for i in idx) for idx in candidates)
        x_hat = pts[0]
        out.append(ScaleCore(lam_hat, x_hat))
        r2 = np.zeros(grid.shape)
        for x, c in zip(mesh, x_hat):
            dx = (x - c + grid.L / 2.0) % grid.L - grid.L / 2.0
            r2 = r2 + dx**2
        mag_work[r2 <= (2.0 * lam_hat) ** 2] = 0.0
    return out


def extract_concentration(fields: list, p: float | None = None):
    """Dominant ScaleCore per field (None for zero fields)."""
    results = []
    for f in fields:
        cores = extract_cores(f, count=1, p=p)
        results.append(cores[0] if cores else None)
    return results


def _nl_term_hat(u: RealVectorField, mask) -> np.ndarray:
    from .solver import _div_flux_hat

    acc = _div_flux_hat(u.data, u.grid, mask)
    _leray_coefficients(acc, u.grid)
    return acc


def ns_equation_residual(traj: Trajectory, dealias_fraction: float = 2.0 / 3.0,
                         drift=None, source=None) -> float:
    """L^2-in-time L^2-in-space residual of du/dt + P div(u x u) - Lap u
    + Q(u, F) - G on the snapshot grid, with centered time differences.

    With drift/source callables this is the perturbed-system residual; without
    them it is the plain equation residual, which serves as the discrete floor
    (the time-differencing error dominates both).
    """
    from .norms import _trapezoid_weights
    from .solver import dealias_mask as _dmask

    grid = traj.grid
    mask = _dmask(grid, dealias_fraction)
    if len(traj.snapshots) < 3:
        raise DomainError("residual check needs at least 3 snapshots")
    k2 = grid.k_squared
    times = traj.times
    mids = range(1, len(times) - 1)
    res_l2 = []
    mid_times = []
    for i in mids:
        dt2 = times[i + 1] - times[i - 1]
        dudt = (traj.snapshots[i + 1].data - traj.snapshots[i - 1].data) / dt2
        u = traj.snapshots[i]
        uh = forward_transform(u.data, grid)
        resid_hat = forward_transform(dudt, grid) + _nl_term_hat(u, mask) + k2 * uh
        if drift is not None:
            f = drift(float(times[i]))
            resid_hat += _pair_q_hat(u, f, mask)
        if source is not None:
            g = source(float(times[i]))
            gh = forward_transform(g.data, grid) * mask
            _leray_coefficients(gh, grid)
            resid_hat -= gh
        resid = RealVectorField(grid, inverse_transform(resid_hat, grid))
        res_l2.append(lebesgue_norm(resid, 2))
        mid_times.append(float(times[i]))
    res_l2 = np.asarray(res_l2)
    wts = _trapezoid_weights(np.asarray(mid_times))
    return float(np.sqrt(np.sum(wts * res_l2**2)))


def _pair_q_hat(a: RealVectorField, b: RealVectorField, mask) -> np.ndarray:
    acc = _div_pair_flux_hat(a.data, b.data, a.grid, mask)
    _leray_coefficients(acc, a.grid)
    return acc


def remainder_equation_residual(r_traj: Trajectory, ev: EvolvedSystem,
                                sys: ProfileSystem, n: int,
                                dealias_fraction: float = 2.0 / 3.0) -> float:
    """Residual of the rescaled-frame remainder equation with the assembled
    drift and source; ties the profile bookkeeping to the perturbed solver."""
    from .scaling import apply_lambda_spacetime

    frame = ev.frame(n)
    r0 = apply_lambda_spacetime(r_traj, frame.inverse(), check_support=False)
    return ns_equation_residual(
        r0,
        dealias_fraction,
        drift=lambda s: drift_term(ev, sys, n, s),
        source=lambda s: _total_source(ev, sys, n, s, dealias_fraction),
    )


def _total_source(ev, sys, n, s, dealias_fraction):
    p1, p2 = source_term(ev, sys, n, s, dealias_fraction)
    return p1 + p2


def pairing_table(traj: Trajectory, tests: list) -> np.ndarray:
    """Grid-quadrature pairings <u(t_k), phi_i> for a battery of test fields."""
    w = traj.grid.cell_volume
    table = np.empty((len(traj.snapshots), len(tests)))
    for k, snap in enumerate(traj.snapshots):
        for i, phi in enumerate(tests):
            table[k, i] = float(np.sum(snap.data * phi.data) * w)
    return table

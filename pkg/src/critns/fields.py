"""Constructors for the test fields used throughout the suite and the CLI.

Random generators take an explicit numpy Generator (or an int seed) so that
every artifact is reproducible from its config document.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    Grid,
    RealVectorField,
    forward_transform,
    inverse_transform,
    leray_project,
)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def taylor_green(grid: Grid, amplitude: float = 1.0) -> RealVectorField:
    """2D vortex lattice u = A(cos x sin y, -sin x cos y) on the L=2*pi box.

    The convection term is a pure gradient, so the exact evolution is
    amplitude decay exp(-2t) with pressure -A^2 (cos 2x + cos 2y)/4.
    """
    if grid.d != 2:
        raise ValueError("taylor_green is a 2D field")
    x, y = grid.coordinate_mesh()
    u = np.cos(x) * np.sin(y)
    v = -np.sin(x) * np.cos(y)
    return RealVectorField(grid, amplitude * np.stack([u, v]))


def taylor_green_pressure(grid: Grid, amplitude: float = 1.0, t: float = 0.0) -> np.ndarray:
    x, y = grid.coordinate_mesh()
    return -(amplitude**2) * np.exp(-4.0 * t) * (np.cos(2 * x) + np.cos(2 * y)) / 4.0


def single_mode(grid: Grid, mode, ncomp: int = 1, phase: float = 0.0) -> RealVectorField:
    """cos(k.x + phase) replicated over ncomp components, k = 2*pi*mode/L."""
    mesh = grid.coordinate_mesh()
    arg = phase * np.ones(grid.shape)
    for m, x in zip(mode, mesh):
        arg = arg + (2.0 * np.pi * m / grid.L) * x
    comp = np.cos(arg)
    return RealVectorField(grid, np.stack([comp] * ncomp))


def gaussian_bump(grid: Grid, sigma: float, center=None, ncomp: int = 1,
                  amplitude: float = 1.0) -> RealVectorField:
    """Isotropic Gaussian exp(-|x-c|^2 / (2 sigma^2)) per component."""
    mesh = grid.coordinate_mesh()
    c = np.zeros(grid.d) if center is None else np.asarray(center, dtype=float)
    r2 = np.zeros(grid.shape)
    for x, ci in zip(mesh, c):
        dx = x - ci
        # periodic distance keeps the bump single-valued across the seam
        dx = (dx + grid.L / 2.0) % grid.L - grid.L / 2.0
        r2 = r2 + dx**2
    bump = amplitude * np.exp(-r2 / (2.0 * sigma**2))
    return RealVectorField(grid, np.stack([bump] * ncomp))


def gabor_bump(grid: Grid, sigma: float, mode_center, center=None, ncomp: int = 1,
               amplitude: float = 1.0) -> RealVectorField:
    """Gaussian envelope modulated by sin(k0.(x-c)): localized in space and frequency.

    The odd modulation makes the integral vanish exactly for the symmetric
    envelope, so the far field decays to zero rather than to a mean-correction
    floor (which would defeat support detection).
    """
    env = gaussian_bump(grid, sigma, center=center, ncomp=1, amplitude=amplitude)
    mesh = grid.coordinate_mesh()
    c = np.zeros(grid.d) if center is None else np.asarray(center, dtype=float)
    arg = np.zeros(grid.shape)
    for m, x, ci in zip(mode_center, mesh, c):
        dx = (x - ci + grid.L / 2.0) % grid.L - grid.L / 2.0
        arg = arg + (2.0 * np.pi * m / grid.L) * dx
    comp = env.data[0] * np.sin(arg)
    return RealVectorField(grid, np.stack([comp] * ncomp))


def band_noise(grid: Grid, k_lo: float, k_hi: float, seed, ncomp: int | None = None,
               amplitude: float = 1.0, divergence_free: bool = False) -> RealVectorField:
    """Random field with spectrum supported on the shell k_lo <= |k| < k_hi."""
    rng = _rng(seed)
    nc = ncomp or grid.d
    raw = rng.standard_normal((nc,) + grid.shape)
    coeff = forward_transform(raw, grid)
    kmag = np.sqrt(grid.k_squared)
    mask = (kmag >= k_lo) & (kmag < k_hi)
    coeff *= mask
    f = RealVectorField(grid, inverse_transform(coeff, grid))
    if divergence_free:
        f = leray_project(f)
    top = f.max_abs()
    if top > 0:
        f = f * (amplitude / top)
    return f


def random_divfree_field(grid: Grid, seed, k_lo: float = 1.0, k_hi: float | None = None,
                         amplitude: float = 1.0) -> RealVectorField:
    """Mean-free, divergence-free random field, band-limited well inside Nyquist."""
    if k_hi is None:
        k_hi = 0.5 * grid.k_max_axis
    return band_noise(grid, k_lo, k_hi, seed, ncomp=grid.d,
                      amplitude=amplitude, divergence_free=True)


def random_smooth_field(grid: Grid, seed, k_hi: float | None = None, ncomp: int | None = None,
                        amplitude: float = 1.0) -> RealVectorField:
    if k_hi is None:
        k_hi = 0.4 * grid.k_max_axis
    return band_noise(grid, 0.5 * grid.k_min, k_hi, seed, ncomp=ncomp, amplitude=amplitude)


def curl_field(potential: RealVectorField) -> RealVectorField:
    """Spectral curl (3D) or perpendicular gradient of the first component (2D).

    Exactly divergence-free in the discrete calculus, and it preserves the
    spatial decay of the potential (unlike the nonlocal Leray projector).
    """
    grid = potential.grid
    coeff = forward_transform(potential.data, grid)
    k = grid.deriv_wavenumber_mesh
    if grid.d == 2:
        psi = coeff[0]
        comps = [-1j * k[1] * psi, 1j * k[0] * psi]
    else:
        comps = [
            1j * (k[1] * coeff[2] - k[2] * coeff[1]),
            1j * (k[2] * coeff[0] - k[0] * coeff[2]),
            1j * (k[0] * coeff[1] - k[1] * coeff[0]),
        ]
    return RealVectorField(grid, inverse_transform(np.stack(comps), grid))


def localized_divfree_bump(grid: Grid, sigma: float, center=None, seed=0,
                           mode_center=None, amplitude: float = 1.0) -> RealVectorField:
    """Divergence-free localized bump: curl of a Gabor-type vector potential.

    The curl keeps the Gaussian envelope, so the field respects
    boundary-amplitude guards whenever sigma is well below the box size.
    """
    rng = _rng(seed)
    if mode_center is None:
        mode_center = [3.0] + [1.0] * (grid.d - 1)
    data = []
    ncomp_pot = 1 if grid.d == 2 else 3
    for c in range(ncomp_pot):
        direction = rng.permutation(np.asarray(mode_center, dtype=float))
        g = gabor_bump(grid, sigma, direction, center=center, ncomp=1)
        data.append(g.data[0])
    f = curl_field(RealVectorField(grid, np.stack(data)))
    top = f.max_abs()
    if top > 0:
        f = f * (amplitude / top)
    return f

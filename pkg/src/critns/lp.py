"""Dyadic frequency localization and the Bony product split.

The radial cutoff chi equals 1 below r=1, 0 above r=2, with a smooth
exponential bridge in between.  Low-pass at level j multiplies by
chi(|k|/2^j); the band at level j is the difference of consecutive low-pass
operators and is supported on the annulus 2^j <= |k| <= 2^{j+2}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBandWarning, GridMismatchError
from .grid import Grid, RealVectorField, apply_multiplier, forward_transform, inverse_transform


def _psi(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def chi(r) -> np.ndarray:
    """Radial cutoff: 1 on [0,1], 0 on [2,inf), smooth monotone bridge between."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    out[r <= 1.0] = 1.0
    mid = (r > 1.0) & (r < 2.0)
    a = _psi(2.0 - r[mid])
    b = _psi(r[mid] - 1.0)
    out[mid] = a / (a + b)
    return out


def band_range(grid: Grid) -> tuple[int, int]:
    """Smallest and largest dyadic level with nonvacuous band content.

    The low-pass at j_min captures only the mean mode, and the low-pass at
    j_max + 1 is the identity on every resolvable mode, so the bands in
    [j_min, j_max] telescope exactly to Id - mean.
    """
    j_min = int(np.floor(np.log2(grid.k_min))) - 1
    j_max = int(np.ceil(np.log2(grid.k_max))) - 1
    return j_min, j_max


def _band_multiplier(grid: Grid, j: int) -> np.ndarray:
    kmag = np.sqrt(grid.k_squared)
    return chi(kmag / 2.0 ** (j + 1)) - chi(kmag / 2.0**j)


def band_is_resolvable(grid: Grid, j: int) -> bool:
    return 2.0**j < grid.k_max and 2.0 ** (j + 2) > grid.k_min


def low_pass(f: RealVectorField, j: int) -> RealVectorField:
    """S_j: multiplier chi(|k|/2^j).  Above the range it is the identity."""
    kmag = np.sqrt(f.grid.k_squared)
    return apply_multiplier(f, chi(kmag / 2.0**j))


def band_project(f: RealVectorField, j: int) -> RealVectorField:
    """Delta_j = S_{j+1} - S_j, supported on 2^j <= |k| <= 2^{j+2}."""
    if not band_is_resolvable(f.grid, j):
        warnings.warn(
            f"band j={j} lies outside the resolvable range of the grid",
            EmptyBandWarning,
            stacklevel=2,
        )
        return RealVectorField(f.grid, np.zeros_like(f.data))
    return apply_multiplier(f, _band_multiplier(f.grid, j))


@dataclass
class LPBandSet:
    """All resolvable bands of a field plus the below-range low-pass."""

    source: RealVectorField
    j_min: int
    j_max: int
    bands: list = field(default_factory=list)
    low: RealVectorField | None = None

    def reconstruct(self) -> RealVectorField:
        total = self.low.copy()
        for b in self.bands:
            total = total + b
        return total


def decompose(f: RealVectorField, j_min: int | None = None,
              j_max: int | None = None) -> LPBandSet:
    """Split f into its resolvable dyadic bands; exact telescoping by construction."""
    lo, hi = band_range(f.grid)
    j_min = lo if j_min is None else j_min
    j_max = hi if j_max is None else j_max
    coeff = forward_transform(f.data, f.grid)
    kmag = np.sqrt(f.grid.k_squared)
    low = inverse_transform(coeff * chi(kmag / 2.0**j_min), f.grid)
    bands = []
    for j in range(j_min, j_max + 1):
        mult = chi(kmag / 2.0 ** (j + 1)) - chi(kmag / 2.0**j)
        bands.append(RealVectorField(f.grid, inverse_transform(coeff * mult, f.grid)))
    return LPBandSet(source=f, j_min=j_min, j_max=j_max, bands=bands,
                     low=RealVectorField(f.grid, low))


def paraproduct(grid: Grid, f: np.ndarray, g: np.ndarray):
    """Bony split of the pointwise product of two scalar sample arrays.

    Returns (T_f g, T_g f, Pi) with T_f g = sum_j S_{j-1} f * Delta_j g, the
    symmetric term, and Pi collecting |j - j'| <= 1 interactions together with
    the below-range low block.  The three parts sum to f*g pointwise up to
    roundoff because the blocks partition every mode of both factors.
    """
    if f.shape != grid.shape or g.shape != grid.shape:
        raise GridMismatchError("paraproduct factors must live on the given grid")
    j_min, j_max = band_range(grid)
    kmag = np.sqrt(grid.k_squared)
    cf = forward_transform(f, grid)
    cg = forward_transform(g, grid)
    low_mult = chi(kmag / 2.0**j_min)
    blocks_f = [inverse_transform(cf * low_mult, grid)]
    blocks_g = [inverse_transform(cg * low_mult, grid)]
    for j in range(j_min, j_max + 1):
        mult = chi(kmag / 2.0 ** (j + 1)) - chi(kmag / 2.0**j)
        blocks_f.append(inverse_transform(cf * mult, grid))
        blocks_g.append(inverse_transform(cg * mult, grid))

    # block index 0 is the low block, acting as level j_min - 1 in the gap rule
    nb = len(blocks_f)
    tfg = np.zeros(grid.shape)
    tgf = np.zeros(grid.shape)
    pi = np.zeros(grid.shape)
    cum_f = np.zeros(grid.shape)
    cum_g = np.zeros(grid.shape)
    for b in range(nb):
        if b >= 2:
            cum_f += blocks_f[b - 2]
            cum_g += blocks_g[b - 2]
        tfg += cum_f * blocks_g[b]
        tgf += cum_g * blocks_f[b]
        for a in (b - 1, b, b + 1):
            if 0 <= a < nb and a <= b:
                term = blocks_f[a] * blocks_g[b]
                if a != b:
                    term = term + blocks_f[b] * blocks_g[a]
                pi += term
    return tfg, tgf, pi

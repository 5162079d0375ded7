"""Periodic grids, real/spectral vector fields and Fourier-multiplier operators.

The box is [-L/2, L/2)^d sampled with N points per axis (N a power of two).
Wavenumbers are k = 2*pi*m/L with m in {-N/2, ..., N/2-1} per axis, stored in
standard FFT layout.  The forward transform carries the 1/N^d factor, so the
mode-m coefficient of exp(i k.x) has modulus 1; the Plancherel test in the
suite pins this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import DomainError, GridMismatchError, InvalidFieldError

# scipy.fft worker count; the CLI sets this from --threads.
_FFT_WORKERS = 1


def set_fft_workers(n: int) -> None:
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(n))


def get_fft_workers() -> int:
    return _FFT_WORKERS


DIVERGENCE_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sampling lattice on a centered box."""

    d: int
    N: int
    L: float = 2.0 * np.pi

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError(f"spatial dimension must be 2 or 3, got {self.d}")
        if self.N < 8 or self.N % 2 != 0 or not self._fft_friendly(self.N):
            raise DomainError(
                f"N must be an even 2,3-smooth number >= 8 (powers of two preferred), got {self.N}"
            )
        if not (self.L > 0):
            raise DomainError(f"box side must be positive, got {self.L}")

    @staticmethod
    def _fft_friendly(n: int) -> bool:
        for p in (2, 3):
            while n % p == 0:
                n //= p
        return n == 1

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def spacing(self) -> float:
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.d

    @cached_property
    def axis_coords(self) -> np.ndarray:
        """1D coordinates, origin at the box center."""
        return -self.L / 2.0 + self.spacing * np.arange(self.N)

    def coordinate_mesh(self) -> list:
        axes = [self.axis_coords] * self.d
        return list(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def axis_wavenumbers(self) -> np.ndarray:
        """1D wavenumbers in FFT layout, k = 2*pi*m/L."""
        return 2.0 * np.pi * scipy.fft.fftfreq(self.N, d=1.0 / self.N) / self.L

    @cached_property
    def wavenumber_mesh(self) -> list:
        k = self.axis_wavenumbers
        out = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.N
            out.append(k.reshape(shape))
        return out

    @cached_property
    def deriv_wavenumber_mesh(self) -> list:
        """Wavenumbers for odd-order derivatives: the unpaired Nyquist mode is
        zeroed so first derivatives of real fields stay Hermitian-consistent."""
        k = self.axis_wavenumbers.copy()
        k[self.N // 2] = 0.0
        out = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.N
            out.append(k.reshape(shape))
        return out

    @cached_property
    def deriv_k_squared(self) -> np.ndarray:
        k2 = np.zeros(self.shape)
        for ka in self.deriv_wavenumber_mesh:
            k2 = k2 + ka**2
        return k2

    @cached_property
    def k_squared(self) -> np.ndarray:
        k2 = np.zeros(self.shape)
        for ka in self.wavenumber_mesh:
            k2 = k2 + ka**2
        return k2

    @property
    def k_min(self) -> float:
        """Smallest nonzero wavenumber magnitude."""
        return 2.0 * np.pi / self.L

    @property
    def k_max_axis(self) -> float:
        """Per-axis Nyquist wavenumber."""
        return np.pi * self.N / self.L

    @property
    def k_max(self) -> float:
        """Largest resolvable wavenumber magnitude (corner of the spectral cube)."""
        return np.sqrt(self.d) * self.k_max_axis

    def compatible(self, other: "Grid") -> bool:
        return self.d == other.d and self.N == other.N and np.isclose(self.L, other.L)


def _require_same_grid(*fields) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if not g.compatible(f.grid):
            raise GridMismatchError("fields live on different grids")
    return g


@dataclass(frozen=True)
class RealVectorField:
    """Real samples of a vector field; data has shape (components, N, ..., N)."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != self.grid.d + 1 or self.data.shape[1:] != self.grid.shape:
            raise InvalidFieldError(
                f"data shape {self.data.shape} incompatible with grid {self.grid.shape}"
            )
        if self.data.dtype != np.float64:
            object.__setattr__(self, "data", np.asarray(self.data, dtype=np.float64))

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    def require_finite(self) -> "RealVectorField":
        if not np.all(np.isfinite(self.data)):
            raise InvalidFieldError("field contains non-finite samples")
        return self

    def __add__(self, other: "RealVectorField") -> "RealVectorField":
        _require_same_grid(self, other)
        return RealVectorField(self.grid, self.data + other.data)

    def __sub__(self, other: "RealVectorField") -> "RealVectorField":
        _require_same_grid(self, other)
        return RealVectorField(self.grid, self.data - other.data)

    def __mul__(self, scalar: float) -> "RealVectorField":
        return RealVectorField(self.grid, self.data * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "RealVectorField":
        return RealVectorField(self.grid, -self.data)

    def copy(self) -> "RealVectorField":
        return RealVectorField(self.grid, self.data.copy())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def to_spectral(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, forward_transform(self.data, self.grid))

    def divergence_free(self, tol: float = DIVERGENCE_TOL) -> bool:
        return spectral_divergence_ratio(self) <= tol


@dataclass(frozen=True)
class SpectralVectorField:
    """Fourier coefficients of a real field (Hermitian-symmetric)."""

    grid: Grid
    coefficients: np.ndarray

    @property
    def ncomp(self) -> int:
        return self.coefficients.shape[0]

    def to_real(self) -> RealVectorField:
        return RealVectorField(self.grid, inverse_transform(self.coefficients, self.grid))

    def hermitian_defect(self) -> float:
        """Max deviation from conj-symmetry, relative to the largest coefficient."""
        c = self.coefficients
        flipped = c
        for axis in range(1, c.ndim):
            flipped = np.flip(np.roll(flipped, -1, axis=axis), axis=axis)
        top = np.max(np.abs(c))
        if top == 0.0:
            return 0.0
        return float(np.max(np.abs(c - np.conj(flipped))) / top)


def forward_transform(data: np.ndarray, grid: Grid) -> np.ndarray:
    """FFT over the spatial axes with the 1/N^d normalization."""
    axes = tuple(range(data.ndim - grid.d, data.ndim))
    return scipy.fft.fftn(data, axes=axes, workers=_FFT_WORKERS) / grid.N**grid.d


def inverse_transform(coeff: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(coeff.ndim - grid.d, coeff.ndim))
    return np.real(scipy.fft.ifftn(coeff * grid.N**grid.d, axes=axes, workers=_FFT_WORKERS))


def apply_multiplier(f: RealVectorField, multiplier: np.ndarray) -> RealVectorField:
    """Apply a scalar Fourier multiplier m(k) to every component."""
    coeff = forward_transform(f.data, f.grid)
    coeff *= multiplier
    return RealVectorField(f.grid, inverse_transform(coeff, f.grid))


def spectral_divergence_ratio(f: RealVectorField) -> float:
    """max_k |k.u_hat(k)| / max_k |u_hat(k)| over components."""
    grid = f.grid
    coeff = forward_transform(f.data, grid)
    div = np.zeros(grid.shape, dtype=np.complex128)
    for c, ka in enumerate(grid.deriv_wavenumber_mesh[: f.ncomp]):
        div += 1j * ka * coeff[c]
    top = np.max(np.abs(coeff))
    if top == 0.0:
        return 0.0
    return float(np.max(np.abs(div)) / top)


def _leray_coefficients(coeff: np.ndarray, grid: Grid) -> np.ndarray:
    """In-place Leray projection of a (d, ...) coefficient array."""
    k2 = grid.deriv_k_squared
    inv_k2 = np.zeros_like(k2)
    nz = k2 > 0
    inv_k2[nz] = 1.0 / k2[nz]
    kdotu = np.zeros(grid.shape, dtype=np.complex128)
    for c, ka in enumerate(grid.deriv_wavenumber_mesh):
        kdotu += ka * coeff[c]
    kdotu *= inv_k2
    for c, ka in enumerate(grid.deriv_wavenumber_mesh):
        coeff[c] -= ka * kdotu
    return coeff


def leray_project(f: RealVectorField) -> RealVectorField:
    """Project onto divergence-free fields; the k=0 (mean) mode passes through."""
    f.require_finite()
    if f.ncomp != f.grid.d:
        raise InvalidFieldError("Leray projection needs one component per axis")
    coeff = forward_transform(f.data, f.grid)
    _leray_coefficients(coeff, f.grid)
    return RealVectorField(f.grid, inverse_transform(coeff, f.grid))


def heat_semigroup(f: RealVectorField, t: float) -> RealVectorField:
    """exp(t*Laplacian): multiplier exp(-t|k|^2).  Identity at t=0."""
    if t < 0:
        raise DomainError(f"heat semigroup needs t >= 0, got {t}")
    f.require_finite()
    if t == 0.0:
        return f.copy()
    return apply_multiplier(f, np.exp(-t * f.grid.k_squared))


def heat_derivative_kernel(f: RealVectorField, tau: float) -> RealVectorField:
    """K(tau) = tau * d/dtau exp(tau*Laplacian): multiplier -tau|k|^2 exp(-tau|k|^2).

    Annihilates the mean mode; on a single mode k the response over tau peaks
    at tau = 1/|k|^2 with amplitude factor exp(-1).
    """
    if tau <= 0:
        raise DomainError(f"heat derivative kernel needs tau > 0, got {tau}")
    f.require_finite()
    k2 = f.grid.k_squared
    return apply_multiplier(f, -tau * k2 * np.exp(-tau * k2))


def laplacian(f: RealVectorField) -> RealVectorField:
    return apply_multiplier(f, -f.grid.k_squared)


def gradient(grid: Grid, scalar: np.ndarray) -> RealVectorField:
    """Spectral gradient of a scalar sample array; returns a d-component field."""
    coeff = forward_transform(scalar, grid)
    comps = [inverse_transform(1j * ka * coeff, grid) for ka in grid.deriv_wavenumber_mesh]
    return RealVectorField(grid, np.stack(comps))


def mean_mode(f: RealVectorField) -> np.ndarray:
    return f.data.reshape(f.ncomp, -1).mean(axis=1)


def zero_field(grid: Grid, ncomp: int | None = None) -> RealVectorField:
    return RealVectorField(grid, np.zeros((ncomp or grid.d,) + grid.shape))

"""Spectral core: grids, transforms, Leray projection, heat operators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critns import Grid, RealVectorField, heat_derivative_kernel, heat_semigroup, leray_project
from critns.errors import DomainError, InvalidFieldError
from critns.fields import random_smooth_field, single_mode, taylor_green
from critns.grid import (
    forward_transform,
    gradient,
    inverse_transform,
    laplacian,
    mean_mode,
    spectral_divergence_ratio,
    zero_field,
)
from critns.norms import lebesgue_norm

from conftest import rel_err


class TestGrid:
    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            Grid(4, 32)
        with pytest.raises(DomainError):
            Grid(2, 20)  # 20 = 2^2 * 5 is not 2,3-smooth
        with pytest.raises(DomainError):
            Grid(2, 32, L=-1.0)
        with pytest.raises(DomainError):
            Grid(3, 4)

    def test_accepts_fft_friendly_sizes(self):
        for n in (8, 16, 24, 32, 48, 64):
            Grid(2, n)

    def test_wavenumbers(self, grid2):
        k = grid2.axis_wavenumbers * grid2.L / (2 * np.pi)
        assert k[0] == 0
        assert k[1] == 1
        assert k[grid2.N // 2] == -grid2.N // 2
        assert np.isclose(grid2.k_min, 2 * np.pi / grid2.L)

    def test_coordinates_centered(self, grid2):
        x = grid2.axis_coords
        assert np.isclose(x[0], -grid2.L / 2)
        assert np.isclose(x[-1], grid2.L / 2 - grid2.spacing)


class TestTransforms:
    def test_roundtrip(self, grid3):
        f = random_smooth_field(grid3, seed=0, ncomp=3)
        back = inverse_transform(forward_transform(f.data, grid3), grid3)
        assert rel_err(back, f.data) < 1e-13

    def test_plancherel(self, grid3):
        # forward transform carries 1/N^d, so L^2 quadrature matches L^{d/2} l^2
        f = random_smooth_field(grid3, seed=1, ncomp=3)
        coeff = forward_transform(f.data, grid3)
        l2_spec = np.sqrt(grid3.L**grid3.d * np.sum(np.abs(coeff) ** 2))
        assert abs(lebesgue_norm(f, 2) - l2_spec) / l2_spec < 1e-10

    def test_hermitian_symmetry(self, grid2):
        f = random_smooth_field(grid2, seed=2, ncomp=2)
        assert f.to_spectral().hermitian_defect() < 1e-12


class TestLeray:
    def test_annihilates_gradients(self, grid3):
        g = random_smooth_field(grid3, seed=3, ncomp=1)
        grad = gradient(grid3, g.data[0] - g.data[0].mean())
        projected = leray_project(grad)
        assert projected.max_abs() < 1e-12 * grad.max_abs()

    def test_fixes_divergence_free_fields(self, grid3):
        f = leray_project(random_smooth_field(grid3, seed=4, ncomp=3))
        again = leray_project(f)
        assert rel_err(again.data, f.data) < 1e-12

    def test_divergence_oracle(self, grid3):
        # independent oracle: assemble k . u_hat directly from the raw FFT
        f = leray_project(random_smooth_field(grid3, seed=5, ncomp=3))
        coeff = forward_transform(f.data, grid3)
        div = sum(1j * ka * coeff[c] for c, ka in enumerate(grid3.deriv_wavenumber_mesh))
        assert np.max(np.abs(div)) <= 1e-10 * np.max(np.abs(coeff))
        assert spectral_divergence_ratio(f) <= 1e-10

    def test_mean_preserved(self, grid3):
        f = random_smooth_field(grid3, seed=6, ncomp=3)
        shifted = RealVectorField(grid3, f.data + np.array([0.3, -0.2, 0.1])[:, None, None, None])
        projected = leray_project(shifted)
        assert np.allclose(mean_mode(projected), [0.3, -0.2, 0.1], atol=1e-13)

    def test_rejects_non_finite(self, grid3):
        data = np.zeros((3,) + grid3.shape)
        data[0, 0, 0, 0] = np.nan
        with pytest.raises(InvalidFieldError):
            leray_project(RealVectorField(grid3, data))

    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_idempotence_property(self, seed):
        grid = Grid(2, 32)
        f = random_smooth_field(grid, seed=seed, ncomp=2)
        once = leray_project(f)
        twice = leray_project(once)
        assert rel_err(twice.data, once.data) < 1e-12


def _periodized_gaussian(grid, sigma, images=2):
    """True image-sum periodization of exp(-|x|^2 / (2 sigma^2))."""
    mesh = grid.coordinate_mesh()
    total = np.zeros(grid.shape)
    ranges = [range(-images, images + 1)] * grid.d
    import itertools

    for shift in itertools.product(*ranges):
        r2 = np.zeros(grid.shape)
        for x, m in zip(mesh, shift):
            r2 = r2 + (x - m * grid.L) ** 2
        total += np.exp(-r2 / (2 * sigma**2))
    return RealVectorField(grid, total[None])


class TestHeat:
    def test_identity_at_zero(self, grid2):
        f = random_smooth_field(grid2, seed=7, ncomp=2)
        assert rel_err(heat_semigroup(f, 0.0).data, f.data) == 0.0

    def test_negative_time_rejected(self, grid2):
        with pytest.raises(DomainError):
            heat_semigroup(random_smooth_field(grid2, seed=8), -0.1)

    def test_single_mode_eigenvalue(self, grid2):
        f = single_mode(grid2, (2, 1))
        k2 = (2**2 + 1**2) * (2 * np.pi / grid2.L) ** 2
        t = 0.37
        assert rel_err(heat_semigroup(f, t).data, np.exp(-k2 * t) * f.data) < 1e-12

    def test_gaussian_width_oracle(self):
        # closed-form heat flow of a periodized Gaussian: width sqrt(sigma^2+2t),
        # amplitude (sigma/width)^d, image sum unchanged
        grid = Grid(2, 64)
        sigma, t = grid.L / 16, 0.25
        f = _periodized_gaussian(grid, sigma)
        flowed = heat_semigroup(f, t)
        width = np.sqrt(sigma**2 + 2 * t)
        oracle = _periodized_gaussian(grid, width) * (sigma / width) ** grid.d
        assert rel_err(flowed.data, oracle.data) < 1e-10

    def test_composition(self, grid3):
        f = random_smooth_field(grid3, seed=9, ncomp=3)
        ab = heat_semigroup(heat_semigroup(f, 0.07), 0.13)
        direct = heat_semigroup(f, 0.2)
        assert rel_err(ab.data, direct.data) < 1e-12

    def test_commutes_with_projection(self, grid3):
        f = random_smooth_field(grid3, seed=10, ncomp=3)
        a = heat_semigroup(leray_project(f), 0.1)
        b = leray_project(heat_semigroup(f, 0.1))
        assert rel_err(a.data, b.data) < 1e-12

    def test_mean_preserved(self, grid2):
        f = RealVectorField(grid2, np.ones((2,) + grid2.shape))
        assert rel_err(heat_semigroup(f, 1.0).data, f.data) < 1e-14


class TestHeatDerivativeKernel:
    def test_constant_killed(self, grid2):
        f = RealVectorField(grid2, np.ones((2,) + grid2.shape))
        assert heat_derivative_kernel(f, 0.5).max_abs() < 1e-14

    def test_unit_mode_at_unit_time(self, grid2):
        f = single_mode(grid2, (1, 0))
        out = heat_derivative_kernel(f, 1.0)
        assert rel_err(out.data, -np.exp(-1.0) * f.data) < 1e-12

    def test_peak_over_tau(self, grid2):
        f = single_mode(grid2, (2, 0))
        k2 = 4.0 * (2 * np.pi / grid2.L) ** 2
        taus = np.linspace(0.01, 2.0, 400) / k2
        amps = [heat_derivative_kernel(f, t).max_abs() for t in taus]
        t_star = taus[int(np.argmax(amps))]
        assert abs(t_star - 1.0 / k2) < 0.02 / k2
        assert abs(max(amps) - np.exp(-1.0)) < 1e-3

    def test_operator_composition_oracle(self, grid3):
        # K(tau) = tau d/dtau exp(tau Lap) equals tau * Lap after the semigroup
        f = random_smooth_field(grid3, seed=11, ncomp=3)
        tau = 0.08
        direct = heat_derivative_kernel(f, tau)
        composed = laplacian(heat_semigroup(f, tau)) * tau
        assert rel_err(direct.data, composed.data) < 1e-12

    def test_nonpositive_tau_rejected(self, grid2):
        with pytest.raises(DomainError):
            heat_derivative_kernel(random_smooth_field(grid2, seed=1), 0.0)


class TestFieldAlgebra:
    def test_zero_field(self, grid3):
        z = zero_field(grid3)
        assert z.ncomp == 3 and z.max_abs() == 0.0

    def test_shape_validation(self, grid3):
        with pytest.raises(InvalidFieldError):
            RealVectorField(grid3, np.zeros((3, 8, 8, 8)))

    def test_taylor_green_divergence_free(self):
        tg = taylor_green(Grid(2, 32))
        assert tg.divergence_free()

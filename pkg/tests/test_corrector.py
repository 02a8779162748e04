import numpy as np
import pytest
from scipy.integrate import quad

from kink_spectra.corrector import (ChannelBasis, TransverseSource, apply_channels, assemble_corrector,
                                    channel_wavenumbers, direct_corrector, partial_field, pde_residual,
                                    solve_channel, star_tail_profile, transverse_source)
from kink_spectra.errors import BranchError
from kink_spectra.gamma import gauss_family
from kink_spectra.models import phi4, potential_well
from kink_spectra.operator1d import Grid1D

from conftest import GX, GY


def _gvals(spec, basis):
    return spec.on_grid(basis.grid_x.nodes, basis.grid_y.nodes)


def test_zero_gamma(phi4_basis):
    z = np.zeros((GX.n_points, GY.n_points))
    assert np.all(transverse_source(0, z, phi4_basis).g == 0)
    assert np.all(assemble_corrector(phi4_basis, z, res_tol=None).values == 0)


def test_odd_gamma_even_product_vanishes(phi4_basis, sg_basis, x_gauss):
    # psi_0 psi_0 and psi_1 psi_1 are even in x, gamma is odd in x
    g = _gvals(x_gauss, phi4_basis)
    assert np.max(np.abs(transverse_source(1, g, phi4_basis).g)) <= 1e-10
    b0 = ChannelBasis(phi4_basis.spectrum, GY, 0)
    assert np.max(np.abs(transverse_source(0, g, b0).g)) <= 1e-10
    assert np.max(np.abs(transverse_source(0, g, sg_basis).g)) <= 1e-10


def test_phi4_cross_source_against_analytic_modes(phi4_basis, x_gauss):
    psi0 = lambda x: np.sqrt(3) / 2 / np.cosh(x) ** 2
    psi1 = lambda x: -np.sqrt(1.5) * np.tanh(x) / np.cosh(x)   # sign: negative tail on the left flipped
    integral = quad(lambda x: x * np.exp(-x**2) * psi0(x) * psi1(x), -10, 10, epsabs=1e-14)[0]
    g = transverse_source(0, _gvals(x_gauss, phi4_basis), phi4_basis).g
    expected = integral * np.exp(-GY.nodes**2)
    assert abs(integral) > 0.1
    np.testing.assert_allclose(g, expected, rtol=2e-3, atol=1e-12)


def test_free_green_function():
    # narrow unit-mass bump, kappa = 1: u(s) = -e^{-|s|}/2 away from the bump, times the
    # exact smoothing factor e^{w^2/2} of a Gaussian of width w
    gy = Grid1D(10.0, 2001)
    w = 0.02
    bump = np.exp(-0.5 * (gy.nodes / w) ** 2) / (w * np.sqrt(2 * np.pi))
    u = solve_channel(1, 1.0, 0.0, TransverseSource(1, bump, gy))
    far = np.abs(gy.nodes) > 0.5
    expected = -np.exp(w**2 / 2) * np.exp(-np.abs(gy.nodes[far])) / 2
    np.testing.assert_allclose(u[far].real, expected, rtol=1e-5, atol=1e-12)


def test_star_channel_bounded_for_zero_mean():
    gy = Grid1D(10.0, 401)
    y = gy.nodes
    g = y * np.exp(-y**2)
    u = solve_channel(3, 2.0, 2.0, TransverseSource(3, g, gy), star=3)
    direct = 0.5 * gy.h * np.abs(y[:, None] - y[None, :]) @ g
    np.testing.assert_allclose(u.real, direct + gy.h**2 / 12 * g, atol=1e-12)
    np.testing.assert_allclose(u.real, -u.real[::-1], atol=1e-12)
    assert np.max(np.abs(u)) < 1.0
    # bounded: constant tails of opposite sign
    assert u.real[-1] == pytest.approx(-0.5 * np.sqrt(np.pi) / 2, rel=1e-3)


def test_zero_source_channel():
    assert np.all(solve_channel(1, 4.0, 3.0, TransverseSource(1, np.zeros(21), Grid1D(1.0, 21))) == 0)


def test_star_kernel_is_limit_of_closed_kernel():
    gy = Grid1D(6.0, 241)
    g = np.exp(-(gy.nodes - 0.5) ** 2)
    src = TransverseSource(0, g, gy)
    star = solve_channel(0, 1.0, 1.0, src, star=0)
    mass = gy.integrate(g)
    errs = []
    for kap in (0.04, 0.02, 0.01):
        closed = solve_channel(1, 1.0 + kap**2, 1.0, src)
        errs.append(np.max(np.abs(closed + mass / (2 * kap) - star)))
    assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.05)
    assert errs[2] / errs[1] == pytest.approx(0.5, abs=0.05)


def test_open_channel_wavenumbers_depend_on_branch():
    lam = np.array([0.0, 3.0, 4.5])
    kp = channel_wavenumbers(lam, 1, 0.0, 1)
    km = channel_wavenumbers(lam, 1, 0.0, -1)
    assert kp[0] == pytest.approx(1j * np.sqrt(3)) and km[0] == pytest.approx(-1j * np.sqrt(3))
    assert kp[2] == km[2] == pytest.approx(np.sqrt(1.5))
    with pytest.raises(BranchError):
        channel_wavenumbers(np.array([1.0, 1.0 + 1e-12]), 0)


def test_real_when_all_channels_closed(well_basis, well_gamma):
    c = assemble_corrector(well_basis, _gvals(well_gamma, well_basis))
    assert c.is_real
    assert len(well_basis.open_channels()) == 0


def test_phi4_corrector_complex_from_open_channel(phi4_basis):
    g = gauss_family("x-gauss", x0=0.5)
    c = assemble_corrector(phi4_basis, _gvals(g, phi4_basis))
    assert phi4_basis.open_channels().tolist() == [0]
    assert not c.is_real


def test_linear_in_gamma(phi4_basis, x_gauss):
    g = _gvals(x_gauss, phi4_basis)
    a = assemble_corrector(phi4_basis, g).values
    b = assemble_corrector(phi4_basis, 2 * g).values
    assert np.max(np.abs(b - 2 * a)) <= 1e-10 * np.max(np.abs(a))


def test_residual_fine_grid():
    gx, gy = Grid1D(10.0, 401), Grid1D(10.0, 401)
    basis = ChannelBasis.build(phi4(), gx, gy, 1)
    c = assemble_corrector(basis, gauss_family("x-gauss").on_grid(gx.nodes, gy.nodes))
    assert c.residual <= 1e-3


def test_star_tail_and_slope():
    gx, gy = Grid1D(10.0, 201), Grid1D(12.0, 241)
    basis = ChannelBasis.build(potential_well(4.0, 2.0), gx, gy, 0)
    gam = gauss_family("x-gauss", amplitude=2.0, x0=1.0)
    gv = gam.on_grid(gx.nodes, gy.nodes)
    c = assemble_corrector(basis, gv)
    g_star = transverse_source(0, gv, basis).g
    tail = np.abs(gy.nodes) > 7.0
    np.testing.assert_allclose(c.channels[0].real[tail], star_tail_profile(g_star, gy, gy.nodes[tail]), atol=1e-6)
    # U* grows like slope * psi*(x) |y|
    assert c.slope_coefficient == pytest.approx(0.5 * gy.integrate(g_star), rel=1e-12)
    assert c.slope_coefficient != 0


def test_direct_oracle_small_grid(well_basis, well_gamma):
    gx, gy = Grid1D(8.0, 81), Grid1D(8.0, 81)
    basis = ChannelBasis.build(phi4(), gx, gy, 1)
    gv = gauss_family("x-gauss").on_grid(gx.nodes, gy.nodes)
    c = assemble_corrector(basis, gv)
    keep = np.flatnonzero(basis.lambdas > basis.lam_star)
    ref = direct_corrector(basis, gv)
    mine = partial_field(basis, c, keep)
    assert np.linalg.norm(mine - ref) / np.linalg.norm(ref) <= 1e-3


def test_apply_channels_pde_residual(well_basis, well_gamma):
    gv = _gvals(well_gamma, well_basis)
    c = assemble_corrector(well_basis, gv)
    assert pde_residual(well_basis, c.values, -gv * well_basis.psi_star[:, None]) == pytest.approx(c.residual)
    assert c.residual < 1e-3

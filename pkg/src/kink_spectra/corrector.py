"""First-order corrector U* via channel decomposition in the H0 eigenbasis.

A field ``f(x, y)`` on the 2D grid is split as ``sum_j psi_j(x) f_j(y)`` over
*all* eigenvectors of the discretized H0 (bound states exactly, the continuum
by the remaining box modes).  Each channel is then a 1D problem in ``y`` with
an explicit kernel:

* star channel:      ``(1 - exp(-k d)) / (2 k)``, which is ``d / 2`` at ``k = 0``
* other channels:    ``-exp(-k_j d) / (2 k_j)``, ``k_j = sqrt(Lambda_j - Lambda* + k^2)``

with ``d = |y - s|``.  Open channels (``Lambda_j < Lambda*``) use the outgoing
continuation ``k_j = branch * i * sqrt(Lambda* - Lambda_j - k^2)``.

The resulting operator is minus the pole-free part of the resolvent of
``-Lap + f'(phi) - z`` at ``z = Lambda* - k^2``; at ``k = 0`` it maps
``gamma psi*`` to U*, which solves ``(-Lap + f'(phi) - Lambda*) U* = -gamma psi*``
and grows like ``psi*(x) / 2 * int |y - s| g*(s) ds``.

Convolutions use the trapezoid rule plus the end correction
``h^2/6 * K'(0+) f(y)`` for the kernel cusp at ``s = y``; every kernel above
has ``K'(0+) = 1/2``.  This lifts the quadrature to fourth order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import BranchError, ResidualTooLarge
from .models import FieldModel
from .operator1d import Grid1D, H0Spectrum, h0_spectrum

_DEGENERATE_GAP = 1e-10


@dataclass(frozen=True)
class ChannelBasis:
    spectrum: H0Spectrum
    grid_y: Grid1D
    star: int

    @classmethod
    def build(cls, model: FieldModel, grid_x: Grid1D, grid_y: Grid1D, star: int) -> "ChannelBasis":
        return cls(h0_spectrum(model, grid_x), grid_y, star)

    @property
    def grid_x(self) -> Grid1D:
        return self.spectrum.grid

    @property
    def lambdas(self) -> np.ndarray:
        return self.spectrum.lambdas

    @property
    def lam_star(self) -> float:
        return float(self.spectrum.lambdas[self.star])

    @property
    def psi_star(self) -> np.ndarray:
        return self.spectrum.psi[:, self.star]

    def project(self, f) -> np.ndarray:
        return self.grid_x.h * (self.spectrum.psi.T @ f)

    def synthesize(self, channels) -> np.ndarray:
        return self.spectrum.psi @ channels

    def open_channels(self) -> np.ndarray:
        return np.flatnonzero(self.lambdas < self.lam_star)


def channel_wavenumbers(lambdas, star: int, k: complex = 0.0, branch: int = 1) -> np.ndarray:
    """``k_j`` for every channel; the star entry is ``k`` itself."""
    lam_star = lambdas[star]
    k2 = complex(k) ** 2
    gap = np.asarray(lambdas, dtype=float) - lam_star
    bad = np.abs(gap) < _DEGENERATE_GAP
    bad[star] = False
    if np.any(bad):
        raise BranchError(f"channels {np.flatnonzero(bad).tolist()} are degenerate with the star mode")
    kj = np.empty(len(gap), dtype=np.complex128)
    closed = gap > 0
    kj[closed] = np.sqrt(gap[closed] + k2)
    kj[~closed] = branch * 1j * np.sqrt(-gap[~closed] - k2)
    kj[star] = k
    return kj


def apply_channels(F, lambdas, star: int, hy: float, k: complex = 0.0, branch: int = 1) -> np.ndarray:
    """Apply the per-channel kernels to transverse sources ``F[j, :]``."""
    F = np.asarray(F, dtype=np.complex128)
    kj = channel_wavenumbers(lambdas, star, k, branch)
    others = np.ones(len(kj), dtype=bool)
    others[star] = False
    out = np.empty_like(F)
    out[others] = -_kernels.exp_conv(F[others], kj[others], hy) / (2.0 * kj[others, None])
    out[star] = _kernels.reg_conv(F[star], k, hy)
    out += (hy**2 / 12.0) * F
    return out


@dataclass(frozen=True)
class TransverseSource:
    channel: int
    g: np.ndarray = field(repr=False)
    grid_y: Grid1D


def transverse_source(j: int, gamma_values, basis: ChannelBasis) -> TransverseSource:
    """``g_j(y) = int psi_j(x) gamma(x, y) psi*(x) dx``."""
    psi = basis.spectrum.psi
    g = basis.grid_x.h * ((psi[:, j] * basis.psi_star) @ gamma_values)
    return TransverseSource(j, g, basis.grid_y)


def solve_channel(j: int, lambda_j: float, lambda_star: float, source: TransverseSource,
                  star: int | None = None, branch: int = 1) -> np.ndarray:
    """Transverse profile ``u_j(y)`` of U* for one channel."""
    is_star = (j == star) if star is not None else lambda_j == lambda_star
    lambdas = np.array([lambda_star, lambda_j]) if not is_star else np.array([lambda_star])
    F = np.atleast_2d(source.g).astype(np.complex128)
    if is_star:
        return apply_channels(F, lambdas, 0, source.grid_y.h)[0]
    F2 = np.vstack([np.zeros_like(F), F])
    return apply_channels(F2, lambdas, 0, source.grid_y.h, branch=branch)[1]


@dataclass(frozen=True)
class CorrectorField:
    star: int
    lam_star: float
    channels: np.ndarray = field(repr=False)     # u_j(y), shape (Nx, Ny)
    values: np.ndarray = field(repr=False)       # U*(x, y)
    slope_coefficient: float                     # U* ~ slope * psi*(x) |y| for |y| -> inf
    residual: float

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.values.imag)) == 0.0)


def _lap_y4(u, hy):
    # fourth-order second difference on nodes 2..Ny-3
    return (-u[:, 4:] + 16 * u[:, 3:-1] - 30 * u[:, 2:-2] + 16 * u[:, 1:-3] - u[:, :-4]) / (12 * hy**2)


def pde_residual(basis: ChannelBasis, values, rhs) -> float:
    """Relative residual of ``(H0 - Lap_y - Lambda*) U = rhs`` on interior y nodes."""
    hy = basis.grid_y.h
    lhs = basis.spectrum.apply(values) - basis.lam_star * values
    lhs = lhs[:, 2:-2] - _lap_y4(values, hy)
    diff = lhs - rhs[:, 2:-2]
    scale = np.linalg.norm(rhs[:, 2:-2])
    return float(np.linalg.norm(diff) / scale) if scale > 0 else float(np.linalg.norm(diff))


def assemble_corrector(basis: ChannelBasis, gamma_values, branch: int = 1,
                       res_tol: float | None = 1e-2) -> CorrectorField:
    src = gamma_values * basis.psi_star[:, None]
    F = basis.project(src)
    chans = apply_channels(F, basis.lambdas, basis.star, basis.grid_y.h, 0.0, branch)
    values = basis.synthesize(chans)
    if not np.any(basis.lambdas < basis.lam_star) and np.max(np.abs(F.imag)) == 0.0:
        chans = chans.real.astype(np.complex128)
        values = values.real.astype(np.complex128)
    slope = 0.5 * basis.grid_y.integrate(F[basis.star].real)
    residual = pde_residual(basis, values, -src)
    if res_tol is not None and residual > res_tol:
        raise ResidualTooLarge(f"corrector residual {residual:.3e} exceeds {res_tol:g}")
    return CorrectorField(basis.star, basis.lam_star, chans, values, float(slope), residual)


def partial_field(basis: ChannelBasis, corrector: CorrectorField, keep) -> np.ndarray:
    """U* restricted to the channels in ``keep``."""
    keep = np.asarray(keep)
    return basis.spectrum.psi[:, keep] @ corrector.channels[keep]


def star_tail_profile(g_star, grid_y: Grid1D, y) -> np.ndarray:
    """``1/2 int |y - s| g*(s) ds`` for ``y`` outside the support, via moments."""
    s = grid_y.nodes
    m0 = grid_y.integrate(g_star)
    m1 = grid_y.integrate(s * g_star)
    y = np.asarray(y, dtype=float)
    return 0.5 * np.sign(y) * (y * m0 - m1)


def direct_corrector(basis: ChannelBasis, gamma_values, exclude=None) -> np.ndarray:
    """Reference solve of the closed-channel part of U* as one sparse 2D system.

    Channels in ``exclude`` (default: the star channel and every open channel)
    are projected out of the source.  The x-part uses the same H0 matrix; the
    y-part a fourth-order Dirichlet stencil, so the two routes share no
    y-discretization.
    """
    if exclude is None:
        exclude = np.flatnonzero(basis.lambdas <= basis.lam_star)
    src = gamma_values * basis.psi_star[:, None]
    F = basis.project(src)
    F[np.asarray(exclude, dtype=int)] = 0.0
    rhs = -basis.synthesize(F)
    nx, ny = rhs.shape
    hy = basis.grid_y.h
    s = basis.spectrum
    hx_op = sp.diags([np.full(nx - 1, s.off), s.diag - basis.lam_star, np.full(nx - 1, s.off)], [-1, 0, 1])
    e = np.ones(ny)
    lap_y = sp.diags([-e[:-2] / 12, 4 / 3 * e[:-1], -5 / 2 * e, 4 / 3 * e[:-1], -e[:-2] / 12],
                     [-2, -1, 0, 1, 2]) / hy**2
    op = (sp.kron(hx_op, sp.identity(ny)) - sp.kron(sp.identity(nx), lap_y)).tocsc()
    sol = spla.spsolve(op, rhs.real.ravel())
    if np.iscomplexobj(rhs) and np.any(rhs.imag):
        sol = sol + 1j * spla.spsolve(op, rhs.imag.ravel())
    return sol.reshape(nx, ny)

"""Finite-difference linearization operator H0 = -d^2/dx^2 + f'(phi(x)).

The matrix acts on all ``N`` grid nodes with zero ghost values one step beyond
``+-L`` (Dirichlet).  Quadratures over the grid use weight ``h`` at every node,
which is the trapezoid rule on the Dirichlet interval since the integrand
vanishes at the ghost nodes.  That choice keeps the discrete eigenvectors
exactly orthonormal under the same quadrature used everywhere else.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import EigensolverFailure, NoDiscreteModes
from .models import FieldModel, potential_value


@dataclass(frozen=True)
class Grid1D:
    half_length: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError(f"n_points must be odd and >= 3, got {self.n_points}")
        if not self.half_length > 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        x = -self.half_length + self.h * np.arange(self.n_points)
        x[self.n_points // 2] = 0.0
        return x

    def integrate(self, values, axis=-1):
        return self.h * np.sum(values, axis=axis)


@dataclass(frozen=True)
class EigenPair:
    lam: float
    psi: np.ndarray = field(repr=False)
    index: int


@dataclass(frozen=True)
class H0Spectrum:
    """Full eigendecomposition in array form; ``psi[:, j]`` has unit L2 norm."""
    grid: Grid1D
    diag: np.ndarray = field(repr=False)
    off: float
    lambdas: np.ndarray
    psi: np.ndarray = field(repr=False)

    def pairs(self) -> list[EigenPair]:
        return [EigenPair(float(lam), self.psi[:, j], j) for j, lam in enumerate(self.lambdas)]

    def apply(self, u):
        """H0 applied along axis 0 of ``u``."""
        out = self.diag.reshape((-1,) + (1,) * (u.ndim - 1)) * u
        out[1:] += self.off * u[:-1]
        out[:-1] += self.off * u[1:]
        return out


def assemble_h0(model: FieldModel, grid: Grid1D) -> sp.csr_matrix:
    h = grid.h
    diag = 2.0 / h**2 + potential_value(model, grid.nodes)
    off = -np.ones(grid.n_points - 1) / h**2
    return sp.diags([off, diag, off], [-1, 0, 1], format="csr")


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    # first component above 1e-3 of the peak is made positive
    peak = np.max(np.abs(vecs), axis=0)
    first = np.argmax(np.abs(vecs) > 1e-3 * peak, axis=0)
    signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def h0_spectrum(model: FieldModel, grid: Grid1D, residual_tol: float = 1e-8) -> H0Spectrum:
    matrix = assemble_h0(model, grid)
    return _spectrum_from_matrix(matrix, grid, residual_tol)


def _spectrum_from_matrix(matrix, grid: Grid1D, residual_tol: float) -> H0Spectrum:
    d = np.asarray(matrix.diagonal(0), dtype=float)
    e = np.asarray(matrix.diagonal(1), dtype=float)
    if not np.allclose(e, matrix.diagonal(-1)) or np.ptp(e) > 1e-12 * abs(e[0]):
        raise EigensolverFailure("expected a symmetric tridiagonal matrix with constant off-diagonal")
    try:
        lambdas, vecs = eigh_tridiagonal(d, e)
    except (LinAlgError, ValueError) as exc:
        raise EigensolverFailure(str(exc)) from exc
    psi = _fix_sign(vecs) / np.sqrt(grid.h)
    spec = H0Spectrum(grid, d, float(e[0]), lambdas, psi)
    scale = max(1.0, float(np.max(np.abs(d))))
    res = spec.apply(psi) - psi * lambdas
    worst = float(np.max(np.sqrt(grid.h * np.sum(res**2, axis=0))))
    if worst > residual_tol * scale:
        raise EigensolverFailure(f"eigen-residual {worst:.3e} exceeds {residual_tol * scale:.3e}")
    return spec


def eigen_h0(matrix, grid: Grid1D, residual_tol: float = 1e-8) -> list[EigenPair]:
    """All eigenpairs, ascending, with ``h * sum(psi**2) == 1``."""
    return _spectrum_from_matrix(matrix, grid, residual_tol).pairs()


def default_margin(pairs, lambda_e: float) -> float:
    below = [p.lam for p in pairs if p.lam < lambda_e]
    if not below:
        return 0.05
    return max(0.05, 0.25 * (lambda_e - max(below)))


def discrete_modes(pairs, lambda_e: float, margin: float | None = None) -> list[EigenPair]:
    if margin is None:
        margin = default_margin(pairs, lambda_e)
    modes = [p for p in pairs if p.lam < lambda_e - margin]
    if not modes:
        raise NoDiscreteModes(f"no eigenvalue below lambda_e - margin = {lambda_e - margin:g}")
    return modes


def spectral_bottom_2d(model: FieldModel, grid_x: Grid1D, grid_y: Grid1D,
                       max_unknowns: int = 250_000) -> float:
    """Smallest eigenvalue of the 2D operator -Lap + f'(phi(x)) on a Dirichlet box."""
    n = grid_x.n_points * grid_y.n_points
    if n > max_unknowns:
        raise EigensolverFailure(f"{n} unknowns exceeds the cap of {max_unknowns}")
    hx = assemble_h0(model, grid_x)
    hy = grid_y.h
    e = np.ones(grid_y.n_points)
    lap_y = sp.diags([-e[:-1], 2.0 * e, -e[:-1]], [-1, 0, 1]) / hy**2
    op = (sp.kron(hx, sp.identity(grid_y.n_points)) + sp.kron(sp.identity(grid_x.n_points), lap_y)).tocsc()
    shift = float(np.min(potential_value(model, grid_x.nodes))) - 1.0
    try:
        vals = spla.eigsh(op, k=1, sigma=shift, which="LM", return_eigenvectors=False)
    except spla.ArpackError as exc:
        raise EigensolverFailure(str(exc)) from exc
    return float(np.min(vals))


def write_modes_csv(path, grid: Grid1D, modes) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"] + [f"psi_{m.index}" for m in modes])
        for i, x in enumerate(grid.nodes):
            writer.writerow([repr(float(x))] + [repr(float(m.psi[i])) for m in modes])

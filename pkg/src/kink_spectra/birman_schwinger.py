"""Nonperturbative root finding for the scalar equation ``2k = F(eps, k)``.

Writing ``lam^2 = k^2 - Lambda*`` and inverting ``-Lap + f'(phi) + lam^2`` with
the star-channel pole split off gives

    F(eps, k) = -eps * lam(k) * ell*(g),    g = gamma psi* + eps * lam(k) * gamma * Rt(k) g,

where ``Rt(k)`` is the regularized channel operator of ``corrector`` (so that
``Rt(0) gamma psi* = U*``) and ``ell*(f) = int psi*(x) f(x, y) dx dy``.  The
fixed point ``g`` is found by plain iteration, which contracts for small
``eps``.  A root with ``Re k > 0`` is an eigenvalue of the pencil; ``Re k < 0``
a resonance.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .asymptotics import EIGENVALUE, RESONANCE, branch_label, kappa_star, lambda_of_k, snap_K1
from .corrector import ChannelBasis, apply_channels
from .errors import MultipleRoots, NewtonDivergence, NoContraction


class ConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ReducedResolvent:
    basis: ChannelBasis
    gamma_values: np.ndarray = field(repr=False)

    @property
    def lam_star(self) -> float:
        return self.basis.lam_star

    @property
    def kappa(self) -> complex:
        return kappa_star(self.basis.lam_star)

    @property
    def source(self) -> np.ndarray:
        return self.gamma_values * self.basis.psi_star[:, None]

    def apply(self, k: complex, f, branch: int = 1) -> np.ndarray:
        b = self.basis
        F = b.project(f)
        return b.synthesize(apply_channels(F, b.lambdas, b.star, b.grid_y.h, k, branch))

    def ell(self, f) -> complex:
        return ell_star(f, self.basis)

    def constants(self, branch: int = 1) -> tuple[float, complex]:
        """(K1, K2) from this operator, ``K2 = 1/2 ell*(gamma Rt(0) gamma psi*)``."""
        src = self.source
        b = self.basis
        K1_abs = 0.5 * b.grid_x.h * b.grid_y.h * float(np.sum(np.abs(self.gamma_values) * b.psi_star[:, None] ** 2))
        K1 = snap_K1(0.5 * self.ell(src).real, K1_abs)
        K2 = 0.5 * self.ell(self.gamma_values * self.apply(0.0, src, branch))
        return float(K1), complex(K2)

    def search_radius(self) -> float:
        lam = self.basis.lambdas
        gaps = np.abs(np.delete(lam, self.basis.star) - self.lam_star)
        return 0.5 * min(abs(self.kappa), math.sqrt(float(np.min(gaps))))


def ell_star(f, basis: ChannelBasis) -> complex:
    """``int psi*(x) f(x, y) dx dy`` by the grid quadrature."""
    return complex(basis.grid_x.h * basis.grid_y.h * np.sum(basis.psi_star[:, None] * f))


def apply_reduced_resolvent(rr: ReducedResolvent, k: complex, f, branch: int = 1) -> np.ndarray:
    return rr.apply(k, f, branch)


@dataclass(frozen=True)
class FValue:
    value: complex
    iterations: int
    ell: complex
    g: np.ndarray = field(repr=False)


def F_detail(rr: ReducedResolvent, eps: float, k: complex, branch: int,
             tol: float = 1e-12, max_iter: int = 100) -> FValue:
    lam = lambda_of_k(k, branch, rr.kappa)
    src = rr.source.astype(np.complex128)
    if eps == 0:
        return FValue(0j, 0, rr.ell(src), src)
    coef = eps * lam * rr.gamma_values
    g = src
    prev_err = math.inf
    growth = 0
    for it in range(1, max_iter + 1):
        g_new = src + coef * rr.apply(k, g, branch)
        scale = float(np.max(np.abs(g_new))) or 1.0
        err = float(np.max(np.abs(g_new - g))) / scale
        g = g_new
        if err <= tol:
            break
        growth = growth + 1 if err > prev_err else 0
        if not np.isfinite(err) or growth >= 5:
            raise NoContraction(f"fixed-point iteration diverges at eps={eps:g}, k={k:.4g}")
        prev_err = err
    else:
        raise NoContraction(f"no convergence in {max_iter} iterations at eps={eps:g}, k={k:.4g} (err {err:.2e})")
    ell = rr.ell(g)
    if abs(ell) < 1e-12 * float(np.sum(np.abs(g))) * rr.basis.grid_x.h * rr.basis.grid_y.h:
        warnings.warn(f"ell*(g) = {abs(ell):.2e} is nearly zero; the scalar equation is ill-conditioned",
                      ConditioningWarning, stacklevel=2)
    return FValue(-eps * lam * ell, it, ell, g)


def F_eval(rr: ReducedResolvent, eps: float, k: complex, branch: int, **kw) -> complex:
    return F_detail(rr, eps, k, branch, **kw).value


@dataclass(frozen=True)
class BSRoot:
    eps: float
    branch: int
    k: complex
    lam: complex
    kind: str
    residual: float
    newton_iters: int
    winding: int | None = None

    def row(self) -> list:
        return [repr(self.eps), branch_label(self.branch), repr(self.k.real), repr(self.k.imag),
                repr(self.lam.real), repr(self.lam.imag), self.kind, repr(self.residual), self.newton_iters]


CSV_COLUMNS = ["eps", "branch", "re_k", "im_k", "re_lambda", "im_lambda", "kind", "residual", "newton_iters"]


def winding_number(rr: ReducedResolvent, eps: float, branch: int, radius: float, n: int = 64) -> int:
    """Zeros of ``2k - F`` inside ``|k| = radius`` by the argument principle."""
    ks = radius * np.exp(2j * np.pi * np.arange(n) / n)
    G = np.array([2 * k - F_eval(rr, eps, k, branch, tol=1e-10) for k in ks])
    dphase = np.angle(np.roll(G, -1) / G)
    return int(round(float(np.sum(dphase)) / (2 * np.pi)))


def solve_k(rr: ReducedResolvent, eps: float, branch: int, k0: complex = 0j,
            tol: float = 1e-10, max_iter: int = 40, check_uniqueness: bool = True,
            radius: float | None = None) -> BSRoot:
    """Complex Newton on ``G(k) = 2k - F(eps, k)`` with a central-difference derivative."""
    if eps == 0:
        return BSRoot(0.0, branch, 0j, lambda_of_k(0j, branch, rr.kappa), EIGENVALUE, 0.0, 0)
    radius = rr.search_radius() if radius is None else radius

    def G(k):
        return 2 * k - F_eval(rr, eps, k, branch)

    k = complex(k0)
    g = G(k)
    iters = 0
    for iters in range(1, max_iter + 1):
        dk = 1e-7 * max(1.0, abs(k))
        dG = (G(k + dk) - G(k - dk)) / (2 * dk)
        step = g / dG
        k = k - step
        if abs(k) > radius:
            raise NewtonDivergence(f"Newton left the disc |k| < {radius:.3g} at eps={eps:g}")
        g = G(k)
        if abs(step) <= 1e-15 * max(1.0, abs(k)) or abs(g) <= 1e-14 * max(1.0, abs(k)):
            break
    residual = abs(g)
    if residual > tol * max(1.0, abs(k)) or not np.isfinite(residual):
        raise NewtonDivergence(f"Newton stalled with residual {residual:.2e} at eps={eps:g}")
    winding = None
    if check_uniqueness:
        winding = winding_number(rr, eps, branch, radius)
        if winding != 1:
            raise MultipleRoots(f"{winding} zeros inside |k| < {radius:.3g} at eps={eps:g}")
    kind = EIGENVALUE if k.real > 0 else RESONANCE
    return BSRoot(float(eps), branch, k, lambda_of_k(k, branch, rr.kappa), kind, float(residual), iters, winding)


@dataclass(frozen=True)
class SweepResult:
    branch: int
    roots: list
    deviations: np.ndarray        # |k_eps - (c1 eps + c2 eps^2)|
    fitted_order: float


def fit_order(eps, dev) -> float:
    eps = np.asarray(eps, dtype=float)
    dev = np.asarray(dev, dtype=float)
    ok = (eps > 0) & (dev > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(eps[ok]), np.log(dev[ok]), 1)[0])


def eps_sweep(rr: ReducedResolvent, branch: int, eps_list, c1: complex, c2: complex,
              check_uniqueness: bool = True) -> SweepResult:
    eps_list = [float(e) for e in eps_list]
    if any(b < a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be ascending")

    def one(e):
        return solve_k(rr, e, branch, c1 * e + c2 * e**2, check_uniqueness=check_uniqueness)

    roots = pmap(one, eps_list)
    dev = np.array([abs(r.k - (c1 * r.eps + c2 * r.eps**2)) for r in roots])
    return SweepResult(branch, roots, dev, fit_order([r.eps for r in roots], dev))


def holomorphy_defect(rr: ReducedResolvent, eps: float, branch: int, k: complex, h: float = 1e-4) -> float:
    """``|dF/d(conj k)|`` by central differences; zero for a holomorphic F."""
    fx = (F_eval(rr, eps, k + h, branch) - F_eval(rr, eps, k - h, branch)) / (2 * h)
    fy = (F_eval(rr, eps, k + 1j * h, branch) - F_eval(rr, eps, k - 1j * h, branch)) / (2 * h)
    return abs(0.5 * (fx + 1j * fy))


def reconstruct_mode(rr: ReducedResolvent, root: BSRoot) -> np.ndarray:
    """Solution of the 2D pencil on the grid for a root, scaled to unit peak."""
    det = F_detail(rr, root.eps, root.k, root.branch)
    psi = det.ell / (2 * root.k) * rr.basis.psi_star[:, None] - rr.apply(root.k, det.g, root.branch)
    i = np.unravel_index(np.argmax(np.abs(psi)), psi.shape)
    return psi * (np.abs(psi[i]) / psi[i]) / np.abs(psi[i])


def mode_residual(rr: ReducedResolvent, root: BSRoot, psi) -> float:
    """Relative residual of ``(-Lap + f'(phi) + eps lam gamma + lam^2) psi = 0``.

    Uses the H0 matrix in x and a fourth-order stencil in y, on interior nodes.
    """
    b = rr.basis
    hy = b.grid_y.h
    lam = root.lam
    lap_y = (-psi[:, 4:] + 16 * psi[:, 3:-1] - 30 * psi[:, 2:-2] + 16 * psi[:, 1:-3] - psi[:, :-4]) / (12 * hy**2)
    pert = root.eps * lam * rr.gamma_values * psi
    res = b.spectrum.apply(psi)[:, 2:-2] - lap_y + lam**2 * psi[:, 2:-2] + pert[:, 2:-2]
    return float(np.linalg.norm(res) / np.linalg.norm(pert[:, 2:-2]))


def write_roots_csv(path, roots) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in roots:
            w.writerow(r.row())

"""Perturbation constants and small-eps classification of the emerging spectrum.

For a discrete eigenvalue Lambda* of H0 with eigenfunction psi*, the pencil
``(-Lap + f'(phi) + eps*lam*gamma + lam^2) psi = 0`` has, for each branch
``b = +1/-1`` of ``lam(k) = b * i * kappa* * sqrt(1 - k^2 / kappa*^2)``, one
root ``k_eps`` near zero with

    k_eps = c1 * eps + c2 * eps^2 + O(eps^3),
    c1 = -b * i * kappa* * K1,     c2 = kappa*^2 * K2_b,

where ``K1 = 1/2 int gamma psi*^2`` and ``K2_b = 1/2 int gamma psi* U*`` (U* built
with the branch-b outgoing convention; ``K2_- = conj(K2_+)``).  The root is an
eigenvalue when ``Re k_eps > 0`` and a resonance when ``Re k_eps < 0``.

The sign of ``c1`` follows from the positive transverse Green's function
``exp(-k|y|) / (2k)``.  It fixes which of the limits ``+-|kappa*|`` carries the
eigenvalue when Lambda* < 0, and the sign of the eps^3 real part of ``lam``.
Both are confirmed independently by reconstructing the mode and checking the
2D equation (``birman_schwinger.mode_residual``) and by time integration.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchCut, Undetermined
from .operator1d import Grid1D

EIGENVALUE = "eigenvalue"
RESONANCE = "resonance"
UNDETERMINED = "undetermined"

BRANCHES = (1, -1)


def branch_label(b: int) -> str:
    return "+" if b > 0 else "-"


def integrate2d(values, grid_x: Grid1D, grid_y: Grid1D):
    return grid_x.h * grid_y.h * np.sum(values)


K1_CANCEL_TOL = 1e-12


def snap_K1(K1: float, abs_integral: float) -> float:
    """Zero out ``K1`` when it is cancellation noise of ``1/2 int |gamma| psi*^2``."""
    return 0.0 if abs(K1) <= K1_CANCEL_TOL * abs_integral else float(K1)


def compute_K1(gamma_values, psi_star, grid_x: Grid1D, grid_y: Grid1D) -> float:
    w = psi_star[:, None] ** 2
    K1 = float(0.5 * integrate2d(gamma_values * w, grid_x, grid_y).real)
    return snap_K1(K1, float(0.5 * integrate2d(np.abs(gamma_values) * w, grid_x, grid_y).real))


def compute_K2(gamma_values, psi_star, corrector, grid_x: Grid1D, grid_y: Grid1D) -> complex:
    values = corrector.values if hasattr(corrector, "values") else corrector
    return complex(0.5 * integrate2d(gamma_values * psi_star[:, None] * values, grid_x, grid_y))


def kappa_star(lambda_star: float) -> complex:
    """Principal square root; pure imaginary with positive imaginary part when Lambda* < 0."""
    return cmath.sqrt(complex(lambda_star))


def lambda_of_k(k: complex, branch: int, kappa: complex) -> complex:
    """``lam(k)`` with ``lam^2 = k^2 - kappa^2`` and ``lam(0) = branch * i * kappa``."""
    k = complex(k)
    if abs(k) >= abs(kappa):
        raise BranchCut(f"|k| = {abs(k):.3g} reaches the branch point |kappa*| = {abs(kappa):.3g}")
    return branch * 1j * kappa * cmath.sqrt(1.0 - (k / kappa) ** 2)


def _kind_from_real(x: float, tol: float) -> str | None:
    if x > tol:
        return EIGENVALUE
    if x < -tol:
        return RESONANCE
    return None


@dataclass(frozen=True)
class BranchPrediction:
    branch: int
    c1: complex
    c2: complex
    lambda0: complex
    lambda_series: tuple = field(repr=False)   # coefficients of eps^0..eps^4 (None when unknown)
    kind: str
    vanish_tol: float = 1e-12

    def k_series(self, eps):
        return self.c1 * eps + self.c2 * eps**2

    def lambda_at(self, eps):
        """Truncated series for lam; drops coefficients that are unknown."""
        return sum(c * eps**n for n, c in enumerate(self.lambda_series) if c is not None)

    def kind_at(self, eps: float) -> str:
        re = (self.c1 * eps + self.c2 * eps**2).real
        scale = max(abs(self.c1) * eps, abs(self.c2) * eps**2, 1e-300)
        return _kind_from_real(re, self.vanish_tol * scale) or UNDETERMINED


@dataclass(frozen=True)
class SpectralPrediction:
    mode: int
    lambda_star: float
    kappa_star: complex
    K1: float
    K2: complex
    branches: dict
    statement: int | None
    extended_regime: bool

    degenerate_tol: float = 1e-12

    @property
    def degenerate(self) -> bool:
        """K1 = K2 = 0, the case the classification does not cover."""
        return abs(self.K1) <= self.degenerate_tol and abs(self.K2) <= self.degenerate_tol

    @property
    def determined(self) -> bool:
        return all(b.kind != UNDETERMINED for b in self.branches.values())


def lambda_series(branch: int, kappa: complex, c1: complex, c2: complex) -> tuple:
    """Coefficients of lam(eps) from ``lam = b i kappa (1 - k^2/(2 kappa^2) - ...)``.

    The eps^4 coefficient needs the eps^3 term of ``k``, so it is only
    available when ``c1 == 0``.
    """
    b = branch
    a0 = b * 1j * kappa
    a2 = -b * 1j * c1**2 / (2 * kappa)
    a3 = -b * 1j * c1 * c2 / kappa
    a4 = -b * 1j * c2**2 / (2 * kappa) if c1 == 0 else None
    return (a0, 0j, a2, a3, a4)


def asymptotic_kind(c1: complex, c2: complex, tol: float = 1e-12) -> str:
    """Kind for small eps from the dominant non-vanishing real part."""
    scale = max(abs(c1), abs(c2), 1e-300)
    return (_kind_from_real(c1.real, tol * scale)
            or _kind_from_real(c2.real, tol * scale)
            or UNDETERMINED)


def case_table(lambda_star: float, K1: float, K2: float, tol: float = 1e-12):
    """Case lookup by sign pattern: (statement, {limit of lam: kind}).

    Limits are keyed by ``lam(0)``: ``+-i kappa*`` for Lambda* > 0 and
    ``+-|kappa*|`` for Lambda* < 0.  Returns ``(None, None)`` outside the table.
    """
    kap = abs(kappa_star(lambda_star))
    s1 = 0 if abs(K1) <= tol else int(np.sign(K1))
    s2 = 0 if abs(K2) <= tol else int(np.sign(K2))
    if lambda_star > 0:
        if s2 > 0:
            return 2, {1j * kap: EIGENVALUE, -1j * kap: EIGENVALUE}
        if s2 < 0:
            return 3, {1j * kap: RESONANCE, -1j * kap: RESONANCE}
        return None, None
    if lambda_star < 0:
        if s1 != 0:
            # the eigenvalue emerges from -sign(K1) |kappa*|
            return 4, {-s1 * kap: EIGENVALUE, s1 * kap: RESONANCE}
        if s2 > 0:
            return 5, {kap: RESONANCE, -kap: RESONANCE}
        if s2 < 0:
            return 6, {kap: EIGENVALUE, -kap: EIGENVALUE}
    return None, None


def predict(mode: int, lambda_star: float, K1: float, K2: complex,
            vanish_tol: float = 1e-12, zero_tol: float = 0.0) -> SpectralPrediction:
    """Per-branch k_eps and lam_eps series, and the eigenvalue/resonance split."""
    if abs(lambda_star) <= zero_tol or lambda_star == 0:
        raise ValueError("Lambda* = 0: the spectral point does not move (k_eps = 0)")
    kap = kappa_star(lambda_star)
    K2 = complex(K2)
    branches = {}
    for b in BRANCHES:
        k2b = K2 if b > 0 else K2.conjugate()
        c1 = -b * 1j * kap * K1
        c2 = kap**2 * k2b
        # c1 is exactly imaginary when kappa* is real, and exactly real otherwise
        if lambda_star > 0:
            c1 = complex(0.0, c1.imag)
        else:
            c1 = complex(c1.real, 0.0)
        kind = asymptotic_kind(c1, c2, vanish_tol)
        branches[b] = BranchPrediction(b, c1, c2, b * 1j * kap, lambda_series(b, kap, c1, c2), kind, vanish_tol)
    extended = abs(K2.imag) > vanish_tol * max(abs(K2), 1e-300)
    statement = None
    if not extended:
        statement, _ = case_table(lambda_star, K1, K2.real, vanish_tol * max(abs(K1), abs(K2), 1e-300))
    pred = SpectralPrediction(mode, float(lambda_star), kap, float(K1), K2, branches, statement, extended)
    return pred


def require_determined(pred: SpectralPrediction) -> SpectralPrediction:
    if pred.degenerate:
        raise Undetermined(f"mode {pred.mode}: K1 = K2 = 0 to tolerance; outside the classified cases")
    if not pred.determined:
        raise Undetermined(f"mode {pred.mode}: leading real parts of k vanish; kind needs higher orders")
    return pred


def classify_by_table(pred: SpectralPrediction) -> dict | None:
    """Kinds per branch from the case table, for cross-checking the sign formula."""
    st, table = case_table(pred.lambda_star, pred.K1, pred.K2.real,
                           pred.branches[1].vanish_tol * max(abs(pred.K1), abs(pred.K2), 1e-300))
    if table is None:
        return None
    out = {}
    for b, bp in pred.branches.items():
        key = min(table, key=lambda z: abs(z - bp.lambda0))
        out[b] = table[key]
    return out


def summary_dict(pred: SpectralPrediction) -> dict:
    def c(z):
        return None if z is None else {"re": float(z.real), "im": float(z.imag)}

    return {
        "mode": pred.mode,
        "lambda_star": pred.lambda_star,
        "kappa_star": c(pred.kappa_star),
        "K1": pred.K1,
        "K2": c(pred.K2),
        "statement": pred.statement,
        "extended_regime": pred.extended_regime,
        "degenerate": pred.degenerate,
        "branches": {
            branch_label(b): {
                "kind": bp.kind,
                "lambda0": c(bp.lambda0),
                "k_series": [c(bp.c1), c(bp.c2)],
                "lambda_series": [c(a) for a in bp.lambda_series],
            }
            for b, bp in pred.branches.items()
        },
    }

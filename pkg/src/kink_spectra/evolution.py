"""Time-domain integration of the linearized field equation

    phi_tt - Lap phi + eps * gamma * phi_t + f'(kink) phi = 0

on a Dirichlet box with a quadratic sponge layer along all four sides.

The scheme is staggered leapfrog: the velocity lives at half steps and the
damping term uses the average of the two half-step velocities around each
field update, so the update stays explicit pointwise.  With no damping the
quantity ``1/2 |v^(n-1/2)|^2 + 1/2 <A phi^(n-1), phi^n>`` (``A = -Lap + V``) is
conserved exactly; with damping its decrease equals the accumulated work of
the damping terms, which is tracked separately for gamma and for the sponge.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from . import _kernels
from .errors import CFLViolation, NonFinite, PoorFit
from .gamma import GammaSpec
from .models import FieldModel, potential_value
from .operator1d import Grid1D


@dataclass(frozen=True)
class WaveState:
    field: np.ndarray = dc_field(repr=False)
    velocity: np.ndarray = dc_field(repr=False)   # at time - dt / 2
    time: float
    dt: float


def sponge_profile(grid: Grid1D, width: float, strength: float) -> np.ndarray:
    if width <= 0 or strength == 0:
        return np.zeros(grid.n_points)
    depth = np.clip((np.abs(grid.nodes) - (grid.half_length - width)) / width, 0.0, None)
    return strength * depth**2


@dataclass(frozen=True)
class EvolutionSetup:
    grid_x: Grid1D
    grid_y: Grid1D
    potential: np.ndarray = dc_field(repr=False)   # (Nx, Ny)
    gamma_values: np.ndarray = dc_field(repr=False)
    eps: float
    sponge: np.ndarray = dc_field(repr=False)
    dt: float
    window_fraction: float = 0.75

    @classmethod
    def build(cls, model: FieldModel, gamma: GammaSpec | None, eps: float, grid_x: Grid1D, grid_y: Grid1D,
              dt: float | None = None, sponge_width: float | tuple[float, float] = 12.0, sponge_strength: float = 1.0,
              window_fraction: float = 0.75) -> "EvolutionSetup":
        h = min(grid_x.h, grid_y.h)
        dt = 0.45 * h / math.sqrt(2.0) if dt is None else dt
        pot = np.broadcast_to(potential_value(model, grid_x.nodes)[:, None],
                              (grid_x.n_points, grid_y.n_points)).copy()
        gv = (np.zeros_like(pot) if gamma is None else gamma.on_grid(grid_x.nodes, grid_y.nodes))
        wx, wy = (sponge_width, sponge_width) if np.isscalar(sponge_width) else sponge_width
        sx = sponge_profile(grid_x, wx, sponge_strength)
        sy = sponge_profile(grid_y, wy, sponge_strength)
        sponge = sx[:, None] + sy[None, :]
        return cls(grid_x, grid_y, pot, gv, float(eps), sponge, float(dt), window_fraction)

    @property
    def window(self) -> np.ndarray:
        wx = np.abs(self.grid_x.nodes) <= self.window_fraction * self.grid_x.half_length
        wy = np.abs(self.grid_y.nodes) <= self.window_fraction * self.grid_y.half_length
        return wx[:, None] & wy[None, :]

    def check_cfl(self, dt: float) -> None:
        h = min(self.grid_x.h, self.grid_y.h)
        if dt > 0.5 * h / math.sqrt(2.0):
            raise CFLViolation(f"dt = {dt:g} exceeds 0.5 h / sqrt(2) = {0.5 * h / math.sqrt(2.0):g}")
        if np.any(self.sponge[self.window] != 0):
            raise ValueError("sponge overlaps the interior window")

    def apply_operator(self, u) -> np.ndarray:
        """``(-Lap_h + V) u`` with zero Dirichlet ghosts."""
        hx, hy = self.grid_x.h, self.grid_y.h
        out = (self.potential + 2.0 / hx**2 + 2.0 / hy**2) * u
        out[1:, :] -= u[:-1, :] / hx**2
        out[:-1, :] -= u[1:, :] / hx**2
        out[:, 1:] -= u[:, :-1] / hy**2
        out[:, :-1] -= u[:, 1:] / hy**2
        return out


def seed_mode(psi_star, envelope_width: float, grid_x: Grid1D, grid_y: Grid1D, dt: float,
              omega: float = 0.0, phase: str = "cos") -> WaveState:
    """``psi*(x)`` times a Gaussian in ``y`` (``envelope_width=inf`` gives a flat window).

    ``phase="cos"`` starts at rest; ``"sin"`` starts from zero field with
    velocity ``omega * psi*``, the quadrature partner of an ``e^{i omega t}`` mode.
    """
    y = grid_y.nodes
    env = np.ones_like(y) if math.isinf(envelope_width) else np.exp(-0.5 * (y / envelope_width) ** 2)
    prof = np.outer(psi_star, env)
    t_half = -0.5 * dt
    if phase == "cos":
        fld, vel = prof, -omega * math.sin(omega * t_half) * prof
    elif phase == "sin":
        fld, vel = np.zeros_like(prof), omega * math.cos(omega * t_half) * prof
    else:
        raise ValueError("phase must be 'cos' or 'sin'")
    return WaveState(np.ascontiguousarray(fld, dtype=float), np.ascontiguousarray(vel, dtype=float), 0.0, dt)


def seed_from_mode(psi, lam: complex, dt: float) -> WaveState:
    """Real initial data for the solution ``Re(e^{lam t} psi)``."""
    fld = np.real(psi)
    vel = np.real(lam * np.exp(-0.5 * lam * dt) * psi)
    return WaveState(np.ascontiguousarray(fld, dtype=float), np.ascontiguousarray(vel, dtype=float), 0.0, dt)


@dataclass
class Ledger:
    gamma_work: float = 0.0
    sponge_work: float = 0.0


def step(state: WaveState, setup: EvolutionSetup, nsteps: int = 1, ledger: Ledger | None = None) -> WaveState:
    setup.check_cfl(state.dt)
    phi = state.field.copy()
    v = state.velocity.copy()
    wg, ws = _kernels.leapfrog(phi, v, setup.potential, setup.eps * setup.gamma_values, setup.sponge,
                               state.dt, setup.grid_x.h, setup.grid_y.h, int(nsteps))
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(v))):
        raise NonFinite(f"non-finite field at t = {state.time + nsteps * state.dt:g}")
    if ledger is not None:
        ledger.gamma_work += wg
        ledger.sponge_work += ws
    return WaveState(phi, v, state.time + nsteps * state.dt, state.dt)


def energy(state: WaveState, setup: EvolutionSetup) -> float:
    """The leapfrog-conserved energy at the half step ``time - dt/2``."""
    area = setup.grid_x.h * setup.grid_y.h
    prev = state.field - state.dt * state.velocity
    return float(0.5 * area * (np.sum(state.velocity**2) + np.sum(prev * setup.apply_operator(state.field))))


def interior_norm(state: WaveState, setup: EvolutionSetup) -> float:
    w = setup.window
    return float(math.sqrt(setup.grid_x.h * setup.grid_y.h * np.sum(state.field[w] ** 2)))


def interior_amplitude(state: WaveState, setup: EvolutionSetup, omega: float) -> float:
    """``sqrt(|phi|^2 + |phi_t|^2 / omega^2)`` on the window; flat for a pure ``e^{i omega t}`` mode."""
    w = setup.window
    area = setup.grid_x.h * setup.grid_y.h
    return float(math.sqrt(area * (np.sum(state.field[w] ** 2) + np.sum(state.velocity[w] ** 2) / omega**2)))


@dataclass(frozen=True)
class TimeSeries:
    t: np.ndarray
    norm: np.ndarray
    amplitude: np.ndarray
    energy: np.ndarray
    gamma_work: np.ndarray
    sponge_work: np.ndarray

    CSV_COLUMNS = ("t", "interior_norm", "interior_amplitude", "energy", "gamma_work", "sponge_work")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_COLUMNS)
            for row in zip(self.t, self.norm, self.amplitude, self.energy, self.gamma_work, self.sponge_work):
                w.writerow([repr(float(v)) for v in row])


def run(setup: EvolutionSetup, state: WaveState, t_end: float, sample_every: int = 50,
        omega: float | None = None) -> tuple[WaveState, TimeSeries]:
    nsteps = int(round((t_end - state.time) / state.dt))
    ledger = Ledger()
    rows = []

    def record(s):
        amp = interior_amplitude(s, setup, omega) if omega else float("nan")
        rows.append((s.time, interior_norm(s, setup), amp, energy(s, setup), ledger.gamma_work, ledger.sponge_work))

    record(state)
    done = 0
    while done < nsteps:
        n = min(sample_every, nsteps - done)
        state = step(state, setup, n, ledger)
        done += n
        record(state)
    cols = [np.array(c) for c in zip(*rows)]
    return state, TimeSeries(*cols)


@dataclass(frozen=True)
class RateFit:
    rate: float
    r2: float


def measure_rate(t, values, skip: float = 0.0, min_r2: float = 0.9) -> RateFit:
    """Least-squares slope of ``log(values)`` against ``t`` for ``t >= skip``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (t >= skip) & (v > 0)
    if keep.sum() < 3:
        raise PoorFit("fewer than three samples after the transient")
    tt, lv = t[keep], np.log(v[keep])
    slope, icpt = np.polyfit(tt, lv, 1)
    resid = lv - (slope * tt + icpt)
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    if r2 < min_r2:
        raise PoorFit(f"log-linear fit R^2 = {r2:.3f} < {min_r2}")
    return RateFit(float(slope), r2)

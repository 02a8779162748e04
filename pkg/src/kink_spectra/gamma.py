"""Localized gain/loss profiles gamma(x, y) and their structural checks.

Built-in families are Gaussians multiplied by an odd polynomial in the
coordinates relative to ``center``.  Parity is checked about ``center``; a
profile centered away from the kink is how translated kinks are modelled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DecayViolation, ParityViolation


class Parity(str, Enum):
    ODD_BOTH = "odd-in-both"     # gamma(-x, -y) = -gamma(x, y)
    ODD_X = "odd-in-x"           # gamma(-x, y) = -gamma(x, y)
    ODD_Y = "odd-in-y"           # gamma(x, -y) = -gamma(x, y)


@dataclass(frozen=True)
class GammaSpec:
    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    decay_C: float
    decay_a: float
    parity: Parity
    params: dict = field(default_factory=dict)
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.decay_C > 0 and self.decay_a > 0):
            raise ValueError("decay constants C and a must be positive")

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.asarray(self.func(x, y), dtype=float)

    def on_grid(self, x_nodes, y_nodes) -> np.ndarray:
        X, Y = np.meshgrid(x_nodes, y_nodes, indexing="ij")
        return self(X, Y)

    def scaled(self, factor: float) -> "GammaSpec":
        fn = self.func
        params = dict(self.params, amplitude=self.params.get("amplitude", 1.0) * factor)
        return GammaSpec(lambda x, y: factor * fn(x, y), self.decay_C * max(abs(factor), 1e-300),
                         self.decay_a, self.parity, params, self.center)


def gamma_eval(spec: GammaSpec, x, y):
    return spec(x, y)


def _gauss_family(kind: str, amplitude: float, alpha: float, alpha_y: float | None,
                  x0: float, y0: float, beta: float):
    ay = alpha if alpha_y is None else alpha_y
    polys = {
        "x-gauss": (lambda X, Y: X, Parity.ODD_X),
        "y-gauss": (lambda X, Y: Y, Parity.ODD_Y),
        "xy-gauss": (lambda X, Y: X * Y, Parity.ODD_X),
        "x-plus-y-gauss": (lambda X, Y: X + beta * Y, Parity.ODD_BOTH),
    }
    try:
        poly, parity = polys[kind]
    except KeyError:
        raise KeyError(f"unknown gamma family {kind!r}; choose from {sorted(polys)}") from None

    def fn(x, y):
        X = x - x0
        Y = y - y0
        return amplitude * poly(X, Y) * np.exp(-alpha * X**2 - ay * Y**2)

    return fn, parity


def _fit_decay_C(fn, a: float, center) -> float:
    # sup_r |gamma| e^{a r} over a polar sample, padded by 5%; Gaussian tails
    # make the supremum attained at moderate radius
    r = np.linspace(0.0, 40.0 + abs(center[0]) + abs(center[1]), 2001)
    th = np.linspace(0.0, 2 * np.pi, 721)
    R, T = np.meshgrid(r, th, indexing="ij")
    vals = np.abs(fn(R * np.cos(T), R * np.sin(T))) * np.exp(a * R)
    return max(1.05 * float(np.max(vals)), 1e-300)


def gauss_family(kind: str = "x-gauss", amplitude: float = 1.0, alpha: float = 1.0,
                 alpha_y: float | None = None, x0: float = 0.0, y0: float = 0.0,
                 beta: float = 1.0, decay_C: float | None = None,
                 decay_a: float = 1.0) -> GammaSpec:
    """``amplitude * p(X, Y) * exp(-alpha X^2 - alpha_y Y^2)``, ``X = x - x0``, ``Y = y - y0``.

    ``p`` is ``X``, ``Y``, ``X Y`` or ``X + beta Y``.  When ``decay_C`` is not
    given it is fitted so that ``|gamma| <= C exp(-a r)`` holds on a dense
    polar sample.
    """
    fn, parity = _gauss_family(kind, amplitude, alpha, alpha_y, x0, y0, beta)
    if decay_C is None:
        decay_C = _fit_decay_C(fn, decay_a, (x0, y0))
    params = dict(family=kind, amplitude=amplitude, alpha=alpha,
                  alpha_y=alpha if alpha_y is None else alpha_y, x0=x0, y0=y0, beta=beta)
    return GammaSpec(fn, decay_C, decay_a, parity, params, (x0, y0))


def custom_gamma(expression: str, parity: Parity | str, decay_C: float, decay_a: float,
                 center: tuple[float, float] = (0.0, 0.0)) -> GammaSpec:
    """Profile from a sympy expression in ``x`` and ``y``."""
    import sympy as sp

    x, y = sp.symbols("x y", real=True)
    lam = sp.lambdify((x, y), sp.sympify(expression, locals={"x": x, "y": y}), modules="numpy")

    def fn(X, Y):
        return np.broadcast_to(lam(X, Y), np.shape(X)).astype(float)

    return GammaSpec(fn, decay_C, decay_a, Parity(parity), {"family": "custom", "expression": expression}, center)


def _mirror(parity: Parity, X, Y):
    if parity is Parity.ODD_BOTH:
        return -X, -Y
    if parity is Parity.ODD_X:
        return -X, Y
    return X, -Y


def parity_violation(spec: GammaSpec, parity: Parity, xs, ys):
    """Max of ``|gamma(p) + gamma(mirror p)|`` about the center, and where it happens."""
    cx, cy = spec.center
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
    MX, MY = _mirror(parity, X, Y)
    v = np.abs(spec(X + cx, Y + cy) + spec(MX + cx, MY + cy))
    i = np.unravel_index(np.argmax(v), v.shape)
    return float(v[i]), (float(X[i] + cx), float(Y[i] + cy))


def check_parity(spec: GammaSpec, xs, ys, tol: float = 1e-12) -> Parity:
    """Confirm the declared parity on the symmetric sample ``xs x ys`` (offsets from center)."""
    worst, point = parity_violation(spec, spec.parity, xs, ys)
    if worst > tol:
        raise ParityViolation(
            f"declared parity {spec.parity.value} violated by {worst:.3e} at {point}", point, worst)
    return spec.parity


def detect_parity(spec: GammaSpec, xs, ys, tol: float = 1e-12) -> list[Parity]:
    return [p for p in Parity if parity_violation(spec, p, xs, ys)[0] <= tol]


@dataclass(frozen=True)
class DecayReport:
    ratio: float          # max |gamma| e^{a r} / C over the sampled circles
    worst_radius: float
    passed: bool


def check_decay(spec: GammaSpec, radii, n_angles: int = 720) -> DecayReport:
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    th = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    R, T = np.meshgrid(radii, th, indexing="ij")
    ratio = np.abs(spec(R * np.cos(T), R * np.sin(T))) * np.exp(spec.decay_a * R) / spec.decay_C
    per_r = np.max(ratio, axis=1)
    k = int(np.argmax(per_r))
    report = DecayReport(float(per_r[k]), float(radii[k]), bool(per_r[k] <= 1 + 1e-9))
    if not report.passed:
        raise DecayViolation(f"|gamma| e^(a r) / C = {report.ratio:.3e} > 1 at r = {report.worst_radius:g}")
    return report


def gamma_from_config(block: dict) -> GammaSpec:
    block = dict(block)
    family = block.pop("family", "x-gauss")
    if family == "custom":
        return custom_gamma(block["expression"], block["parity"], block["decay_C"], block.get("decay_a", 1.0),
                            (block.get("x0", 0.0), block.get("y0", 0.0)))
    return gauss_family(family, **block)

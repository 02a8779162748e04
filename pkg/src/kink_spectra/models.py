"""Klein-Gordon field models: nonlinearity, kink profile, linearization potential.

Kinks are centered at ``x = 0``.  A model is either a genuine field model
(``f``, ``f_prime`` and ``kink`` given; the potential is ``f'(kink(x))``) or a
synthetic potential well, where only the Schrodinger potential is given.  The
latter has no kink and exists to reach spectral regimes a real kink cannot,
e.g. a negative ground state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationFailure

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FieldModel:
    name: str
    lambda_e_minus: float
    lambda_e_plus: float
    f: ArrayFn | None = None
    f_prime: ArrayFn | None = None
    kink: ArrayFn | None = None
    potential: ArrayFn | None = None

    def __post_init__(self):
        if self.potential is None and (self.f_prime is None or self.kink is None):
            raise ValueError(f"model {self.name!r} needs either a potential or f_prime and kink")

    @property
    def lambda_e(self) -> float:
        return min(self.lambda_e_minus, self.lambda_e_plus)

    @property
    def has_kink(self) -> bool:
        return self.kink is not None and self.f is not None


def kink_value(model: FieldModel, x):
    if model.kink is None:
        raise ValueError(f"model {model.name!r} has no kink")
    return model.kink(np.asarray(x, dtype=float))


def potential_value(model: FieldModel, x):
    """Potential of the linearization operator, ``f'(phi(x))``."""
    x = np.asarray(x, dtype=float)
    if model.potential is not None:
        return model.potential(x)
    return model.f_prime(model.kink(x))


def _sg_kink(x):
    # 4 arctan(e^x) without overflow; phi(-x) = 2 pi - phi(x)
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    return np.where(x <= 0, 4.0 * np.arctan(e), 2.0 * np.pi - 4.0 * np.arctan(e))


def sine_gordon() -> FieldModel:
    return FieldModel("sine-gordon", 1.0, 1.0, f=np.sin, f_prime=np.cos, kink=_sg_kink)


def phi4() -> FieldModel:
    return FieldModel(
        "phi4", 4.0, 4.0,
        f=lambda u: 2.0 * (u**3 - u),
        f_prime=lambda u: 6.0 * u**2 - 2.0,
        kink=np.tanh,
    )


def potential_well(c: float, depth: float, width: float = 1.0, name: str | None = None) -> FieldModel:
    """Synthetic model with potential ``c - depth * sech^2(x / width)``.

    With ``depth = nu (nu + 1) / width^2`` this is the Poschl-Teller well whose
    bound states sit at ``c - (nu - n)^2 / width^2``.
    """
    def pot(x):
        return c - depth / np.cosh(np.asarray(x, dtype=float) / width) ** 2
    return FieldModel(name or f"well(c={c:g},depth={depth:g},width={width:g})", c, c, potential=pot)


BUILTINS = {"sine-gordon": sine_gordon, "phi4": phi4}


def builtin(name: str) -> FieldModel:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; built-ins are {sorted(BUILTINS)}") from None


def model_from_expressions(name: str, lambda_e_minus: float, lambda_e_plus: float,
                           f: str | None = None, kink: str | None = None,
                           potential: str | None = None) -> FieldModel:
    """Build a model from sympy-parsable strings.

    ``f`` is a function of ``u``; ``kink`` and ``potential`` are functions of
    ``x``.  ``f'`` is obtained by symbolic differentiation.
    """
    import sympy as sp

    u, x = sp.symbols("u x", real=True)

    def lamb(expr, var):
        fn = sp.lambdify(var, expr, modules="numpy")
        return lambda a: np.broadcast_to(fn(np.asarray(a, dtype=float)), np.shape(a)).astype(float)

    if potential is not None:
        return FieldModel(name, lambda_e_minus, lambda_e_plus,
                          potential=lamb(sp.sympify(potential, locals={"x": x}), x))
    if f is None or kink is None:
        raise ValueError("expression model needs 'potential', or both 'f' and 'kink'")
    f_expr = sp.sympify(f, locals={"u": u})
    return FieldModel(name, lambda_e_minus, lambda_e_plus,
                      f=lamb(f_expr, u), f_prime=lamb(sp.diff(f_expr, u), u),
                      kink=lamb(sp.sympify(kink, locals={"x": x}), x))


@dataclass(frozen=True)
class ModelReport:
    kink_residual: float          # 4th-order stencil, used for the pass/fail test
    kink_residual_2nd: float      # plain 3-point stencil
    limit_residual_minus: float
    limit_residual_plus: float
    passed: bool


def kink_residual(model: FieldModel, nodes: np.ndarray, order: int = 2) -> np.ndarray:
    """Pointwise residual of ``-phi'' + f(phi)`` on the interior nodes."""
    h = nodes[1] - nodes[0]
    phi = kink_value(model, nodes)
    if order == 2:
        d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / h**2
        return -d2 + model.f(phi[1:-1])
    if order == 4:
        d2 = (-phi[4:] + 16.0 * phi[3:-1] - 30.0 * phi[2:-2] + 16.0 * phi[1:-3] - phi[:-4]) / (12.0 * h**2)
        return -d2 + model.f(phi[2:-2])
    raise ValueError("order must be 2 or 4")


def validate_model(model: FieldModel, grid, tol: float = 1e-6) -> ModelReport:
    """Check the kink ODE and the limits of the potential at both ends of ``grid``."""
    nodes = grid.nodes
    L = grid.half_length
    if model.has_kink:
        r4 = float(np.max(np.abs(kink_residual(model, nodes, order=4))))
        r2 = float(np.max(np.abs(kink_residual(model, nodes, order=2))))
    else:
        r4 = r2 = 0.0
    v = potential_value(model, np.array([-L, L]))
    lim_m = float(abs(v[0] - model.lambda_e_minus))
    lim_p = float(abs(v[1] - model.lambda_e_plus))
    limit_tol = max(tol, np.exp(-L))
    passed = r4 <= tol and lim_m <= limit_tol and lim_p <= limit_tol
    report = ModelReport(r4, r2, lim_m, lim_p, passed)
    if not passed:
        raise ValidationFailure(
            f"model {model.name!r} failed validation: kink residual {r4:.3e}, "
            f"limit residuals {lim_m:.3e} / {lim_p:.3e} (tol {tol:g})"
        )
    return report

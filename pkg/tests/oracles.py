"""Independent reference computations shared by the tests."""
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def shoot_bound_state(potential, lambda_e, bracket, parity, x_left=-14.0):
    """Bound state of ``-psi'' + V psi = lam psi`` by shooting from the left decay tail to x = 0.

    ``parity`` is "even" (psi'(0) = 0) or "odd" (psi(0) = 0); ``V`` must be even.
    """
    def mismatch(lam):
        q = math.sqrt(lambda_e - lam)
        sol = solve_ivp(lambda x, y: [y[1], (potential(x) - lam) * y[0]], (x_left, 0.0),
                        [1.0, q], rtol=1e-12, atol=1e-14, method="DOP853")
        psi, dpsi = sol.y[:, -1]
        return dpsi if parity == "even" else psi

    return brentq(mismatch, *bracket, xtol=1e-13)


def phi4_potential(x):
    return 4.0 - 6.0 / math.cosh(x) ** 2


def sg_potential(x):
    return 1.0 - 2.0 / math.cosh(x) ** 2

"""Parallel transport in the prequantum line bundle along pendulum orbits.

Along an integral curve of the Hamiltonian vector field the coefficient z of a
horizontal section, written against the trivializing section, obeys

    dz/dt = (i / hbar) * p(t)^2 * z,

because the connection one-form is p dalpha and dalpha/dt = p. Over one period
the exponent integrates to 2 pi I / hbar, so the holonomy is exp(2 pi i I / hbar)
and is trivial exactly on the Bohr-Sommerfeld levels I = n hbar.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.integrate import solve_ivp

from .classical import SEPARATRIX_BAND, SEPARATRIX_ENERGY, component_action, period
from .errors import DomainError, IntegrationError

__all__ = ["parallel_transport", "holonomy_phase", "is_bohr_sommerfeld"]


def _check_energy(e: float) -> None:
    if e <= 0.0 or abs(e - SEPARATRIX_ENERGY) <= SEPARATRIX_BAND:
        raise DomainError(f"holonomy is defined on regular orbits (e > 0, e != 2), got e={e!r}")


def parallel_transport(e: float, z0: complex, hbar: float, tol: float = 1e-10) -> complex:
    """Transport the fiber value ``z0`` once around the orbit H = e.

    The orbit starts at the bottom of the well, (p, alpha) = (sqrt(2e), 0), which
    lies on every level and on the p > 0 rotation branch. The coefficient ODE is
    integrated together with Hamilton's equations over one period.
    """
    _check_energy(e)
    if not hbar > 0.0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    z0 = complex(z0)
    if z0 == 0.0:
        raise DomainError("parallel transport needs a nonzero fiber value")

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        p, alpha, re, im = y
        rate = p * p / hbar
        return np.array([-math.sin(alpha), p, -rate * im, rate * re])

    y0 = np.array([math.sqrt(2.0 * e), 0.0, z0.real, z0.imag])
    T = period(e)
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=tol, atol=tol * abs(z0))
    if sol.status != 0:
        raise IntegrationError(f"parallel transport failed: {sol.message}", float(sol.t[-1]))
    return complex(sol.y[2, -1], sol.y[3, -1])


def holonomy_phase(e: float, hbar: float) -> complex:
    """Closed form exp(2 pi i I(e) / hbar), with I the action of the connected component."""
    _check_energy(e)
    if not hbar > 0.0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    return cmath.exp(2j * math.pi * component_action(e) / hbar)


def is_bohr_sommerfeld(e: float, hbar: float, tol: float = 1e-8) -> int | None:
    """Quantum number n when |I(e) - n hbar| < tol for the nearest integer n, else None."""
    if e < 0.0:
        raise DomainError(f"pendulum energies are nonnegative, got {e!r}")
    if not hbar > 0.0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    ratio = component_action(e) / hbar
    n = round(ratio)
    return n if abs(ratio - n) * hbar < tol else None

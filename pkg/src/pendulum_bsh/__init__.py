"""Bohr-Sommerfeld quantization of the mathematical pendulum.

Modules, from the bottom up:

- ``elliptic``: complete and incomplete elliptic integrals and adaptive quadrature.
- ``classical``: energy regions, flow, actions, periods and angles.
- ``holonomy``: parallel transport of the prequantum fiber around an orbit.
- ``spectrum``: the Bohr-Sommerfeld levels for a given hbar.
- ``operators``: the sparse ladder operators on the level lattice.
- ``reduction_one_rep`` / ``minus_one_rep``: the Z2 reduction with its two
  lifts to the line bundle, giving the even and the odd levels.
- ``checks`` and ``cli``: property suites and the command-line front end.
"""

from .classical import PhasePoint, Region, action, angle, flow, full_action, period
from .errors import (
    DomainError,
    IntegrationError,
    NoLevelError,
    PendulumError,
    QuadratureError,
    RejectedHbarError,
    ReconstructionError,
)
from .spectrum import QuantumLevel, Spectrum, build_spectrum, validate_hbar

__version__ = "0.1.0"

__all__ = [
    "PhasePoint",
    "Region",
    "action",
    "angle",
    "flow",
    "full_action",
    "period",
    "QuantumLevel",
    "Spectrum",
    "build_spectrum",
    "validate_hbar",
    "PendulumError",
    "DomainError",
    "IntegrationError",
    "NoLevelError",
    "QuadratureError",
    "RejectedHbarError",
    "ReconstructionError",
]

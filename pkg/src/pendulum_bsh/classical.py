"""Classical mechanics of the pendulum H(p, alpha) = p^2/2 - cos(alpha) + 1.

Phase space is the cylinder of points (p, alpha) with alpha taken mod 2 pi.
The energy e = H splits it into the stable equilibrium (e = 0), the
oscillation region (0 < e < 2), the separatrix (e = 2) and the two rotation
regions (e > 2, sign of p fixed).

Actions are normalized as (1/2 pi) times the loop integral of p dalpha, so the
quantization condition everywhere in the package reads ``action = n * hbar``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .elliptic import complete_cos2, complete_E, complete_K, incomplete_F
from .errors import DomainError, IntegrationError

__all__ = [
    "PhasePoint",
    "Region",
    "SEPARATRIX_ENERGY",
    "SEPARATRIX_BAND",
    "OSCILLATION_ACTION_MAX",
    "ROTATION_ACTION_MIN",
    "normalize_angle",
    "classify",
    "hamiltonian",
    "vector_field",
    "flow",
    "turning_angle",
    "period",
    "action",
    "component_action",
    "full_action",
    "angle",
    "loop_action",
]

SEPARATRIX_ENERGY = 2.0
#: Energies closer than this to 2 are treated as lying on the separatrix.
SEPARATRIX_BAND = 1e-9
#: Limit of the oscillation action as e -> 2 from below.
OSCILLATION_ACTION_MAX = 8.0 / math.pi
#: Limit of the rotation action as e -> 2 from above.
ROTATION_ACTION_MIN = 4.0 / math.pi

_TWO_PI = 2.0 * math.pi
#: Smallest relative tolerance the DOP853 stepper accepts.
_RTOL_FLOOR = 2.3e-14


def normalize_angle(alpha: float) -> float:
    """Map an angle to [-pi, pi)."""
    wrapped = math.fmod(alpha + math.pi, _TWO_PI)
    if wrapped < 0.0:
        wrapped += _TWO_PI
    result = wrapped - math.pi
    return -math.pi if result >= math.pi else result


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point (p, alpha) of the cylinder; alpha is stored in [-pi, pi)."""

    p: float
    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "alpha", normalize_angle(float(self.alpha)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhasePoint):
            return NotImplemented
        # Compare angles on the circle so alpha and alpha + 2 pi agree even
        # when the two reductions round differently.
        gap = abs(self.alpha - other.alpha)
        return self.p == other.p and min(gap, _TWO_PI - gap) <= 1e-12

    __hash__ = None  # type: ignore[assignment]

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.alpha])


class Region(enum.Enum):
    STABLE_EQUILIBRIUM = "stable_equilibrium"
    OSCILLATION = "oscillation"
    SEPARATRIX = "separatrix"
    ROTATION_PLUS = "rotation_plus"
    ROTATION_MINUS = "rotation_minus"

    @property
    def is_rotation(self) -> bool:
        return self in (Region.ROTATION_PLUS, Region.ROTATION_MINUS)


def classify(e: float, p: float = 0.0) -> Region:
    """Region containing energy ``e``; the sign of ``p`` picks the rotation branch."""
    if e < 0.0:
        raise DomainError(f"pendulum energies are nonnegative, got {e!r}")
    if e == 0.0:
        return Region.STABLE_EQUILIBRIUM
    if abs(e - SEPARATRIX_ENERGY) <= SEPARATRIX_BAND:
        return Region.SEPARATRIX
    if e < SEPARATRIX_ENERGY:
        return Region.OSCILLATION
    return Region.ROTATION_PLUS if p > 0.0 else Region.ROTATION_MINUS


def hamiltonian(pt: PhasePoint) -> float:
    # 1 - cos(a) written as 2 sin^2(a/2) keeps tiny energies accurate.
    return 0.5 * pt.p * pt.p + 2.0 * math.sin(0.5 * pt.alpha) ** 2


def vector_field(pt: PhasePoint) -> tuple[float, float]:
    """Hamilton's equations: (dp/dt, dalpha/dt) = (-sin alpha, p)."""
    return -math.sin(pt.alpha), pt.p


def _rhs(_t: float, y: np.ndarray) -> np.ndarray:
    return np.array([-math.sin(y[1]), y[0]])


def flow(pt: PhasePoint, t: float, tol: float = 1e-10) -> PhasePoint:
    """Follow Hamilton's equations for time ``t`` (either sign).

    Uses the adaptive Dormand-Prince 8(5,3) pair with relative and absolute
    tolerances tol/100, which keeps the energy drift below 10 tol for |t| <= 100.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if t == 0.0:
        return pt
    sol = solve_ivp(
        _rhs,
        (0.0, float(t)),
        pt.as_array(),
        method="DOP853",
        rtol=max(tol * 1e-2, _RTOL_FLOOR),
        atol=tol * 1e-2,
    )
    if sol.status != 0:
        raise IntegrationError(f"flow integration failed: {sol.message}", float(sol.t[-1]))
    p, alpha = sol.y[:, -1]
    return PhasePoint(p, alpha)


def turning_angle(e: float) -> float:
    """Positive turning point alpha+ of an oscillation, where e = 1 - cos(alpha+)."""
    if not 0.0 < e < SEPARATRIX_ENERGY:
        raise DomainError(f"turning points exist only for 0 < e < 2, got {e!r}")
    return 2.0 * math.asin(math.sqrt(0.5 * e))


def _require_regular(e: float) -> None:
    if e <= 0.0:
        raise DomainError(f"energy must be positive, got {e!r}")
    if abs(e - SEPARATRIX_ENERGY) <= SEPARATRIX_BAND:
        raise DomainError(f"energy {e!r} lies on the separatrix")


def period(e: float) -> float:
    """Period of the orbit at energy e.

    Below the separatrix T = 4 K(sqrt(e/2)). Above it the rotation period is
    T = (2 sqrt 2 / sqrt e) K(sqrt(2/e)), obtained from dt = dalpha / p.
    """
    _require_regular(e)
    if e < SEPARATRIX_ENERGY:
        return 4.0 * complete_K(math.sqrt(0.5 * e))
    return 2.0 * math.sqrt(2.0 / e) * complete_K(math.sqrt(2.0 / e))


def _oscillation_action(e: float) -> float:
    if e == 0.0:
        return 0.0
    return 4.0 * e / math.pi * complete_cos2(math.sqrt(min(0.5 * e, 1.0)))


def _rotation_action(e: float) -> float:
    return 2.0 * math.sqrt(2.0 * e) / math.pi * complete_E(math.sqrt(min(2.0 / e, 1.0)))


def action(e: float, region: Region) -> float:
    """Action of the connected orbit at energy e in ``region``.

    Oscillation (and the equilibrium) gives I0(e); either rotation region gives
    I+-(e), the action of one of the two rotation circles.
    """
    if region is Region.STABLE_EQUILIBRIUM:
        if e != 0.0:
            raise DomainError(f"the stable equilibrium has energy 0, got {e!r}")
        return 0.0
    if region is Region.OSCILLATION:
        if not 0.0 <= e <= SEPARATRIX_ENERGY:
            raise DomainError(f"oscillation energies lie in [0, 2], got {e!r}")
        return _oscillation_action(e)
    if region.is_rotation:
        if not e >= SEPARATRIX_ENERGY:
            raise DomainError(f"rotation energies exceed 2, got {e!r}")
        return _rotation_action(e)
    raise DomainError("the separatrix has no single orbit action; use full_action")


def component_action(e: float) -> float:
    """Action of one connected component of H = e: I0 below 2, I+- above 2."""
    if e < 0.0:
        raise DomainError(f"pendulum energies are nonnegative, got {e!r}")
    return _oscillation_action(e) if e <= SEPARATRIX_ENERGY else _rotation_action(e)


def full_action(e: float) -> float:
    """Action of the whole level set: I0 on [0, 2] and 2 I+- above 2 (continuous at 2)."""
    if e < 0.0:
        raise DomainError(f"pendulum energies are nonnegative, got {e!r}")
    return _oscillation_action(e) if e <= SEPARATRIX_ENERGY else 2.0 * _rotation_action(e)


def _time_from_reference(pt: PhasePoint, e: float) -> float:
    """Time along the orbit from the reference point to ``pt``.

    Oscillation: the reference is the left turning point alpha = -alpha+, and
    the motion first runs through p > 0. With sin(alpha/2) = k sin(phi) and
    k^2 = e/2, the time from the reference is F(phi, k) + K(k) on the upper
    branch and 3K(k) - F(phi, k) on the lower branch.

    Rotation: the reference is alpha = -pi. With phi = alpha/2 and
    kappa^2 = 2/e, the time is sqrt(2/e) (F(phi, kappa) + K(kappa)) when p > 0.
    When p < 0 alpha decreases from pi, giving sqrt(2/e) (K(kappa) - F(phi, kappa)).
    """
    if e < SEPARATRIX_ENERGY:
        k = math.sqrt(0.5 * e)
        K = complete_K(k)
        ratio = max(-1.0, min(1.0, math.sin(0.5 * pt.alpha) / k))
        F = incomplete_F(math.asin(ratio), k)
        return F + K if pt.p > 0.0 or (pt.p == 0.0 and pt.alpha < 0.0) else 3.0 * K - F
    kappa = math.sqrt(2.0 / e)
    scale = math.sqrt(2.0 / e)
    F = incomplete_F(0.5 * pt.alpha, kappa)
    K = complete_K(kappa)
    return scale * (F + K) if pt.p > 0.0 else scale * (K - F)


def angle(pt: PhasePoint) -> float:
    """Angle variable in [0, 2 pi): 2 pi (time since the reference point) / period."""
    e = hamiltonian(pt)
    _require_regular(e)
    value = _TWO_PI * _time_from_reference(pt, e) / period(e)
    value = math.fmod(value, _TWO_PI)
    if value < 0.0:
        value += _TWO_PI
    return 0.0 if value >= _TWO_PI else value


def loop_action(pt: PhasePoint, duration: float, tol: float = 1e-11) -> tuple[float, PhasePoint]:
    """Follow the flow for ``duration`` and return ((1/2 pi) int p^2 dt, end point).

    Over one period this is the action of the orbit through ``pt``, measured
    directly along the trajectory rather than from the closed form.
    """

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        return np.array([-math.sin(y[1]), y[0], y[0] * y[0]])

    sol = solve_ivp(rhs, (0.0, float(duration)), np.array([pt.p, pt.alpha, 0.0]),
                    method="DOP853", rtol=tol, atol=tol)
    if sol.status != 0:
        raise IntegrationError(f"loop integration failed: {sol.message}", float(sol.t[-1]))
    p, alpha, area = sol.y[:, -1]
    return area / _TWO_PI, PhasePoint(p, alpha)

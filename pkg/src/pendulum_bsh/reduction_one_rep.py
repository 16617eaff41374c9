"""Reduction by the reflection (p, alpha) -> (-p, -alpha), trivial lift to the bundle.

The orbit space is the semialgebraic surface

    C(tau) = tau2^2 / 2 - (tau3 + tau1 - 1)(1 - tau1^2) = 0,  |tau1| <= 1, tau3 >= 0,

cut out by the invariants tau = (cos alpha, p sin alpha, H). Its two
singular points (1, 0, 0) and (-1, 0, 2) are the images of the equilibria.
The bracket {F, G} = <grad F x grad G, grad C> makes it a Poisson space, and
the energy tau3 generates the reduced motion.

A reduced level curve at energy e < 2 is the image of half an oscillation,
so its action is I0(e)/2. Above the separatrix the two rotation circles are
swapped by the reflection, so each reduced curve is one circle and its action is I+-(e).
The reduced quantization rule is ``reduced_action(e) = k hbar``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .classical import (
    ROTATION_ACTION_MIN,
    SEPARATRIX_BAND,
    SEPARATRIX_ENERGY,
    PhasePoint,
    Region,
    period,
)
from .elliptic import incomplete_F, quad
from .errors import DomainError, IntegrationError, NoLevelError, ReconstructionError
from .operators import BasisIndex, LinearOperator, Sector
from .spectrum import QuantumLevel, Spectrum, bisect_increasing

__all__ = [
    "ReducedPoint",
    "ScalarField",
    "ReducedLevel",
    "Chart",
    "SINGULAR_POINTS",
    "reflect",
    "orbit_map",
    "casimir",
    "casimir_gradient",
    "coordinate_field",
    "polynomial_field",
    "bracket",
    "reduced_vector_field",
    "reduced_flow",
    "reduced_action",
    "reduced_period",
    "reduced_angle",
    "reduced_spectrum",
    "reconstruct_even",
    "in_fundamental_domain",
    "fundamental_representative",
    "reduced_one_form",
    "choose_chart",
    "reduced_loop_integral",
    "reduced_lowering",
    "reduced_raising",
    "reduced_action_operator",
    "RECONSTRUCTION_TOL",
]

RECONSTRUCTION_TOL = 1e-8
_FD_STEP = 1e-6
#: Smallest relative tolerance the DOP853 stepper accepts.
_RTOL_FLOOR = 2.3e-14


class ReducedPoint(NamedTuple):
    tau1: float
    tau2: float
    tau3: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


SINGULAR_POINTS = (ReducedPoint(1.0, 0.0, 0.0), ReducedPoint(-1.0, 0.0, 2.0))


def reflect(pt: PhasePoint) -> PhasePoint:
    """The symmetry (p, alpha) -> (-p, -alpha)."""
    return PhasePoint(-pt.p, -pt.alpha)


def orbit_map(pt: PhasePoint) -> ReducedPoint:
    p, a = pt.p, pt.alpha
    return ReducedPoint(math.cos(a), p * math.sin(a), 0.5 * p * p + 2.0 * math.sin(0.5 * a) ** 2)


def casimir(tau: Sequence[float]) -> float:
    t1, t2, t3 = tau
    return 0.5 * t2 * t2 - (t3 + t1 - 1.0) * (1.0 - t1 * t1)


def casimir_gradient(tau: Sequence[float]) -> np.ndarray:
    t1, t2, t3 = tau
    rho1 = t3 + t1 - 1.0
    return np.array([2.0 * t1 * rho1 - (1.0 - t1 * t1), t2, -(1.0 - t1 * t1)])


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on R^3 with an optional analytic gradient.

    Without an analytic gradient, ``grad`` falls back to centered differences
    with step 1e-6.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, tau: Sequence[float]) -> float:
        return float(self.value(np.asarray(tau, dtype=float)))

    def grad(self, tau: Sequence[float]) -> np.ndarray:
        x = np.asarray(tau, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(x), dtype=float)
        out = np.empty(3)
        for i in range(3):
            step = np.zeros(3)
            step[i] = _FD_STEP
            out[i] = (self.value(x + step) - self.value(x - step)) / (2.0 * _FD_STEP)
        return out

    def __mul__(self, other: ScalarField) -> ScalarField:
        def value(x: np.ndarray) -> float:
            return self.value(x) * other.value(x)

        def gradient(x: np.ndarray) -> np.ndarray:
            return self.value(x) * other.gradient(x) + other.value(x) * self.gradient(x)

        analytic = self.gradient is not None and other.gradient is not None
        return ScalarField(value, gradient if analytic else None)


def coordinate_field(i: int) -> ScalarField:
    """The coordinate function tau_{i+1} (i = 0, 1, 2)."""
    unit = np.zeros(3)
    unit[i] = 1.0
    return ScalarField(lambda x: float(x[i]), lambda _x: unit.copy())


def polynomial_field(coefficients: dict[tuple[int, int, int], float]) -> ScalarField:
    """Polynomial sum c * tau1^a tau2^b tau3^c with an analytic gradient."""
    terms = [(np.array(powers), c) for powers, c in coefficients.items()]

    def value(x: np.ndarray) -> float:
        return float(sum(c * np.prod(x ** pw) for pw, c in terms))

    def gradient(x: np.ndarray) -> np.ndarray:
        out = np.zeros(3)
        for pw, c in terms:
            for i in range(3):
                if pw[i]:
                    lowered = pw.copy()
                    lowered[i] -= 1
                    out[i] += c * pw[i] * np.prod(x ** lowered)
        return out

    return ScalarField(value, gradient)


CASIMIR_FIELD = ScalarField(lambda x: casimir(x), casimir_gradient)


def bracket(F: ScalarField, G: ScalarField, tau: Sequence[float]) -> float:
    """{F, G}(tau) = <grad F x grad G, grad C>."""
    return float(np.dot(np.cross(F.grad(tau), G.grad(tau)), casimir_gradient(tau)))


def reduced_vector_field(tau: Sequence[float]) -> np.ndarray:
    """Motion generated by tau3: (-tau2, 2 tau1 (tau3 + tau1 - 1) + tau1^2 - 1, 0)."""
    t1, t2, t3 = tau
    return np.array([-t2, 2.0 * t1 * (t3 + t1 - 1.0) + t1 * t1 - 1.0, 0.0])


def reduced_flow(tau0: Sequence[float], t: float, tol: float = 1e-10) -> ReducedPoint:
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if t == 0.0:
        return ReducedPoint(*map(float, tau0))
    sol = solve_ivp(
        lambda _t, y: reduced_vector_field(y),
        (0.0, float(t)),
        np.asarray(tau0, dtype=float),
        method="DOP853",
        rtol=max(tol * 1e-2, _RTOL_FLOOR),
        atol=tol * 1e-2,
    )
    if sol.status != 0:
        raise IntegrationError(f"reduced flow failed: {sol.message}", float(sol.t[-1]))
    return ReducedPoint(*map(float, sol.y[:, -1]))


def _check_regular_energy(e: float) -> None:
    if e <= 0.0 or abs(e - SEPARATRIX_ENERGY) <= SEPARATRIX_BAND:
        raise DomainError(f"reduced action needs e > 0 and e != 2, got {e!r}")


def reduced_action(e: float, tol: float = 1e-14) -> float:
    """Reduced action, evaluated by adaptive quadrature of the phi-substituted integrals.

    For 0 < e < 2 it is (2e/pi) int_0^{pi/2} cos^2 phi / sqrt(1 - (e/2) sin^2 phi) dphi,
    and for e > 2 it is (2 sqrt(2e)/pi) int_0^{pi/2} sqrt(1 - (2/e) sin^2 phi) dphi.
    """
    _check_regular_energy(e)
    half_pi = 0.5 * math.pi
    if e < SEPARATRIX_ENERGY:
        k2 = 0.5 * e
        integral = quad(lambda s: math.cos(s) ** 2 / math.sqrt(1.0 - k2 * math.sin(s) ** 2), 0.0, half_pi, tol)
        return 2.0 * e / math.pi * integral
    k2 = 2.0 / e
    integral = quad(lambda s: math.sqrt(1.0 - k2 * math.sin(s) ** 2), 0.0, half_pi, tol)
    return 2.0 * math.sqrt(2.0 * e) / math.pi * integral


def reduced_period(e: float) -> float:
    """Period of the reduced motion: half the oscillation period below 2, the rotation period above."""
    _check_regular_energy(e)
    return 0.5 * period(e) if e < SEPARATRIX_ENERGY else period(e)


def _lift(tau: Sequence[float]) -> PhasePoint:
    """The preimage of ``tau`` lying in the fundamental domain (p >= 0)."""
    t1, t2, t3 = tau
    alpha = math.acos(max(-1.0, min(1.0, t1)))
    p = math.sqrt(max(0.0, 2.0 * (t3 + t1 - 1.0)))
    # tau2 = p sin(alpha) fixes the sign of alpha once p > 0.
    if t2 < 0.0:
        alpha = -alpha
    return PhasePoint(p, alpha)


def reduced_angle(tau: Sequence[float]) -> float:
    """Angle of the reduced motion in [0, 2 pi), measured from tau1 = 1 with tau2 >= 0.

    The reference is the image of the bottom of the well. The time spent
    reaching ``tau`` is obtained by lifting to the fundamental domain, where
    it is the incomplete first-kind integral of the unreduced motion.
    """
    e = float(tau[2])
    _check_regular_energy(e)
    pt = _lift(tau)
    if e < SEPARATRIX_ENERGY:
        k = math.sqrt(0.5 * e)
        ratio = max(-1.0, min(1.0, math.sin(0.5 * pt.alpha) / k))
        t = incomplete_F(math.asin(ratio), k)
    else:
        kappa = math.sqrt(2.0 / e)
        t = math.sqrt(2.0 / e) * incomplete_F(0.5 * pt.alpha, kappa)
    value = math.fmod(2.0 * math.pi * t / reduced_period(e), 2.0 * math.pi)
    if value < 0.0:
        value += 2.0 * math.pi
    return value


@dataclass(frozen=True)
class ReducedLevel:
    k: int
    energy: float


def reduced_spectrum(hbar: float, k_max: int) -> list[ReducedLevel]:
    """Levels reduced_action(e) = k hbar for k = 0..k_max; k with k hbar = 4/pi is skipped."""
    if not hbar > 0.0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    levels = [ReducedLevel(0, 0.0)]
    below = (SEPARATRIX_BAND, SEPARATRIX_ENERGY - SEPARATRIX_BAND)
    for k in range(1, k_max + 1):
        target = k * hbar
        try:
            if target < ROTATION_ACTION_MIN:
                e = bisect_increasing(reduced_action, target, *below)
            else:
                lo = SEPARATRIX_ENERGY + SEPARATRIX_BAND
                hi = 4.0
                while reduced_action(hi) < target:
                    hi *= 2.0
                e = bisect_increasing(reduced_action, target, lo, hi)
        except NoLevelError:
            continue
        levels.append(ReducedLevel(k, e))
    return levels


def reconstruct_even(levels: Sequence[ReducedLevel], spectrum: Spectrum) -> list[QuantumLevel]:
    """Unreduced partners of reduced levels: n = 2k below the separatrix, sigma^+_k above.

    Reduced levels above the rotation truncation m_max have no partner in the
    spectrum and are skipped.
    """
    out: list[QuantumLevel] = []
    for lv in levels:
        if lv.energy < SEPARATRIX_ENERGY:
            partner = spectrum.level(Region.OSCILLATION, 2 * lv.k)
        else:
            if lv.k > spectrum.m_max:
                continue
            partner = spectrum.level(Region.ROTATION_PLUS, lv.k)
        if abs(partner.energy - lv.energy) > RECONSTRUCTION_TOL:
            raise ReconstructionError(
                f"reduced level k={lv.k} at e={lv.energy!r} does not match unreduced "
                f"n={partner.n} at e={partner.energy!r}"
            )
        out.append(partner)
    return out


def in_fundamental_domain(pt: PhasePoint) -> bool:
    """Membership in {p > 0} together with {p = 0, 0 <= alpha <= pi}."""
    # alpha = pi is stored as -pi by the normalization to [-pi, pi).
    return pt.p > 0.0 or (pt.p == 0.0 and (pt.alpha >= 0.0 or pt.alpha == -math.pi))


def fundamental_representative(pt: PhasePoint) -> PhasePoint:
    """The member of {pt, reflect(pt)} in the fundamental domain."""
    return pt if in_fundamental_domain(pt) else reflect(pt)


class Chart(enum.Enum):
    U1 = "U1"
    U2 = "U2"


_CHART_FLOOR = 1e-12


def reduced_one_form(tau: Sequence[float], tangent: Sequence[float], chart: Chart) -> float:
    """The reduced one-form, whose pullback is p dalpha, evaluated on ``tangent``.

    U1 (tau1 != +-1):        -tau2 / (1 - tau1^2) dtau1
    U2 (tau1 != 0, rho1 != 0): (2 rho1 dtau2 - tau2 dtau1 - tau2 dtau3) / (2 tau1 rho1)
    with rho1 = tau3 + tau1 - 1. The two agree on vectors tangent to C = 0.
    """
    t1, t2, t3 = map(float, tau)
    d1, d2, d3 = map(float, tangent)
    if chart is Chart.U1:
        denom = 1.0 - t1 * t1
        if abs(denom) <= _CHART_FLOOR:
            raise DomainError(f"tau1={t1!r} is outside chart U1")
        return -t2 * d1 / denom
    rho1 = t3 + t1 - 1.0
    denom = 2.0 * t1 * rho1
    if abs(denom) <= _CHART_FLOOR:
        raise DomainError(f"tau={tuple(tau)!r} is outside chart U2")
    return (2.0 * rho1 * d2 - t2 * d1 - t2 * d3) / denom


def choose_chart(tau: Sequence[float]) -> Chart:
    """The chart whose denominator is larger in magnitude at ``tau``."""
    t1, _t2, t3 = tau
    return Chart.U1 if abs(1.0 - t1 * t1) >= abs(2.0 * t1 * (t3 + t1 - 1.0)) else Chart.U2


def reduced_loop_integral(e: float, tol: float = 1e-11) -> float:
    """Line integral of the reduced one-form once around the reduced orbit at energy e.

    The orbit is followed by the reduced flow from the image of the bottom of
    the well. The one-form is evaluated on the velocity in whichever chart is
    better conditioned at each point.
    """
    _check_regular_energy(e)
    tau0 = orbit_map(PhasePoint(math.sqrt(2.0 * e), 0.0))

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        tau = y[:3]
        velocity = reduced_vector_field(tau)
        rate = reduced_one_form(tau, velocity, choose_chart(tau))
        return np.append(velocity, rate)

    sol = solve_ivp(rhs, (0.0, reduced_period(e)), np.append(tau0.as_array(), 0.0),
                    method="DOP853", rtol=tol, atol=tol)
    if sol.status != 0:
        raise IntegrationError(f"reduced loop integral failed: {sol.message}", float(sol.t[-1]))
    return float(sol.y[3, -1])


def _reduced_index(k: int) -> BasisIndex:
    return BasisIndex(Sector.ZERO, k)


def reduced_lowering(levels: Sequence[ReducedLevel]) -> LinearOperator:
    """Shift sigma~_k -> c~_k sigma~_{k-1} on the reduced basis.

    The reduced levels form one chain across the separatrix because the reduced
    action is continuous and increasing there. The constants are
    c~_k = r~0(e_k): 1 on every level except the singular one, where r~0 = 0.
    Reduced basis vectors reuse the ZERO-sector labels with q = k.
    """
    ks = {lv.k for lv in levels}
    cols = {}
    for lv in levels:
        if lv.k >= 1 and lv.energy > 0.0 and (lv.k - 1) in ks:
            cols[_reduced_index(lv.k)] = {_reduced_index(lv.k - 1): 1.0}
    return LinearOperator(cols)


def reduced_raising(levels: Sequence[ReducedLevel]) -> LinearOperator:
    top = max(lv.k for lv in levels)
    up = reduced_lowering(levels).adjoint()
    return LinearOperator(up.columns, frozenset({_reduced_index(top)}))


def reduced_action_operator(levels: Sequence[ReducedLevel], hbar: float) -> LinearOperator:
    return LinearOperator({_reduced_index(lv.k): {_reduced_index(lv.k): lv.k * hbar} for lv in levels})

"""The symmetry lifted to the line bundle with fiber sign -1.

On the trivial bundle with fiber coordinate z = x + i y, the lifted action is
(x, y, p, alpha) -> (-x, -y, -p, -alpha). Its invariants are the pendulum
invariants tau together with sigma = (x^2, y^2, xy, xp, yp). They satisfy

    f1 = tau2^2/2 - rho1 (1 - tau1^2)
    f2 = sigma3^2 - sigma1 sigma2
    f3 = sigma4^2/2 - rho1 sigma1
    f4 = sigma5^2/2 - rho1 sigma2
    f5 = sigma4 sigma5/2 - rho1 sigma3,      rho1 = tau1 + tau3 - 1 = p^2/2.

The reduced quantization has the same action function as the trivial lift.
The sign of the lift shows up when the reduced levels are matched back to
the unreduced ones: a section that is even under the lifted action picks up
a factor -1 across half an oscillation. Its holonomy condition over the
reduced orbit therefore reads reduced_action = (k - 1/2) hbar, which singles
out the odd quantum numbers n = 2k - 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .classical import OSCILLATION_ACTION_MAX, SEPARATRIX_ENERGY, PhasePoint, Region, component_action, hamiltonian
from .elliptic import quad
from .errors import DomainError, ReconstructionError
from .holonomy import is_bohr_sommerfeld
from .reduction_one_rep import (
    RECONSTRUCTION_TOL,
    SINGULAR_POINTS,
    ReducedLevel,
    reduced_action,
    reduced_spectrum,
)
from .spectrum import QuantumLevel, Spectrum, bisect_increasing

__all__ = [
    "InvariantTuple",
    "ReducedBundlePoint",
    "Stratum",
    "StratumClass",
    "reflect_bundle",
    "invariants8",
    "relations_residual",
    "relations_derivative",
    "stratification_matrix",
    "jacobian_rank",
    "in_regular_set",
    "psi",
    "pi_inverse",
    "odd_reduced_spectrum",
    "odd_partner_energy",
    "reconstruct_odd",
    "partial_action",
    "orbit_pair_count",
    "star_transform",
    "is_star_even",
]

RANK_TOL = 1e-8
ON_VARIETY_TOL = 1e-8


class InvariantTuple(NamedTuple):
    tau: tuple[float, float, float]
    sigma: tuple[float, float, float, float, float]

    def as_array(self) -> np.ndarray:
        return np.array(self.tau + self.sigma, dtype=float)

    @property
    def rho1(self) -> float:
        return self.tau[0] + self.tau[2] - 1.0


class ReducedBundlePoint(NamedTuple):
    tau: tuple[float, float, float]
    nu: tuple[float, float]


class Stratum(enum.Enum):
    REGULAR = "regular"
    SINGULAR = "singular"


@dataclass(frozen=True)
class StratumClass:
    kind: Stratum
    rank: int


def reflect_bundle(z: tuple[float, float], pt: PhasePoint) -> tuple[tuple[float, float], PhasePoint]:
    """The lifted symmetry (x, y, p, alpha) -> (-x, -y, -p, -alpha)."""
    return (-z[0], -z[1]), PhasePoint(-pt.p, -pt.alpha)


def invariants8(z: tuple[float, float], pt: PhasePoint) -> InvariantTuple:
    x, y = float(z[0]), float(z[1])
    p, a = pt.p, pt.alpha
    tau = (math.cos(a), p * math.sin(a), hamiltonian(pt))
    sigma = (x * x, y * y, x * y, x * p, y * p)
    return InvariantTuple(tau, sigma)


def relations_residual(t: InvariantTuple) -> np.ndarray:
    t1, t2, _t3 = t.tau
    s1, s2, s3, s4, s5 = t.sigma
    rho1 = t.rho1
    return np.array([
        0.5 * t2 * t2 - rho1 * (1.0 - t1 * t1),
        s3 * s3 - s1 * s2,
        0.5 * s4 * s4 - rho1 * s1,
        0.5 * s5 * s5 - rho1 * s2,
        0.5 * s4 * s5 - rho1 * s3,
    ])


def relations_derivative(t: InvariantTuple) -> np.ndarray:
    """Exact 5 x 8 derivative of (f1..f5) in the coordinates (tau1, tau2, tau3, sigma1..sigma5).

    On the image of ``invariants8`` this matrix never has rank 5: where
    rho1 != 0, 4 rho1^2 f2 lies in the ideal of f3, f4, f5 to first order, so
    the gradient of f2 is a combination of the others.
    """
    t1, t2, _t3 = t.tau
    s1, s2, s3, s4, s5 = t.sigma
    r = t.rho1
    return np.array([
        [2.0 * t1 * r - (1.0 - t1 * t1), t2, -(1.0 - t1 * t1), 0, 0, 0, 0, 0],
        [0, 0, 0, -s2, -s1, 2.0 * s3, 0, 0],
        [-s1, 0, -s1, -r, 0, 0, s4, 0],
        [-s2, 0, -s2, 0, -r, 0, 0, s5],
        [-s3, 0, -s3, 0, 0, -r, 0.5 * s5, 0.5 * s4],
    ], dtype=float)


def stratification_matrix(t: InvariantTuple) -> np.ndarray:
    """The 5 x 8 matrix whose rank separates regular from singular tuples.

    Rows 1 to 4 are the exact derivatives of f1..f4. Row 5 carries
    (sigma5, sigma4) in the sigma4 and sigma5 columns, which is twice the
    derivative of f5 there. This is the matrix the rank criterion was stated
    for. With the exact derivative the rank would be at most 4 everywhere on
    the variety (see ``relations_derivative``), and no point would be regular.
    """
    m = relations_derivative(t)
    s4, s5 = t.sigma[3], t.sigma[4]
    m[4, 6] = s5
    m[4, 7] = s4
    return m


def jacobian_rank(t: InvariantTuple, tol: float = RANK_TOL) -> StratumClass:
    """Numerical rank of the stratification matrix; rank 5 is regular, anything lower singular.

    Singular values at or below ``tol`` times the largest one count as zero.
    """
    scale = max(1.0, float(np.max(np.abs(t.as_array()))) ** 2)
    residual = float(np.max(np.abs(relations_residual(t))))
    if residual > ON_VARIETY_TOL * scale:
        raise DomainError(f"tuple is off the variety (max relation residual {residual:.3e})")
    singular_values = np.linalg.svd(stratification_matrix(t), compute_uv=False)
    top = singular_values[0]
    rank = int(np.sum(singular_values > tol * top)) if top > 0.0 else 0
    return StratumClass(Stratum.REGULAR if rank == 5 else Stratum.SINGULAR, rank)


def in_regular_set(t: InvariantTuple, tol: float = 1e-12) -> bool:
    """Predicate for regular points: tau away from the singular points, sigma-bar != 0, rho1 > 0."""
    tau = np.array(t.tau)
    tau_regular = all(np.max(np.abs(tau - np.array(sp))) > tol for sp in SINGULAR_POINTS)
    sigma_bar = max(abs(v) for v in t.sigma[:3])
    return tau_regular and sigma_bar > tol and t.rho1 > tol


def psi(b: ReducedBundlePoint) -> InvariantTuple:
    """(tau, nu) -> (tau, nu1^2/(2 rho1), nu2^2/(2 rho1), nu1 nu2/(2 rho1), nu1, nu2)."""
    tau = tuple(map(float, b.tau))
    nu1, nu2 = map(float, b.nu)
    rho1 = tau[0] + tau[2] - 1.0
    if not rho1 > 0.0:
        raise DomainError(f"psi needs rho1 > 0, got {rho1!r}")
    if nu1 == 0.0 and nu2 == 0.0:
        raise DomainError("psi needs nu != 0")
    half = 0.5 / rho1
    return InvariantTuple(tau, (half * nu1 * nu1, half * nu2 * nu2, half * nu1 * nu2, nu1, nu2))


def pi_inverse(t: InvariantTuple) -> ReducedBundlePoint:
    """Inverse of ``psi``: keep tau and read off nu = (sigma4, sigma5)."""
    s4, s5 = t.sigma[3], t.sigma[4]
    if not t.rho1 > 0.0:
        raise DomainError(f"pi_inverse needs rho1 > 0, got {t.rho1!r}")
    if s4 == 0.0 and s5 == 0.0:
        raise DomainError("pi_inverse needs (sigma4, sigma5) != 0")
    return ReducedBundlePoint(t.tau, (s4, s5))


def odd_reduced_spectrum(hbar: float, k_max: int) -> list[ReducedLevel]:
    """Reduced levels for the -1 lift: the action function is the same, so are the levels."""
    return reduced_spectrum(hbar, k_max)


def odd_partner_energy(k: int, hbar: float) -> float:
    """Energy where the sign-twisted rule reduced_action = (k - 1/2) hbar holds below the separatrix."""
    target = (k - 0.5) * hbar
    if not 0.0 < target < 0.5 * OSCILLATION_ACTION_MAX:
        raise DomainError(f"(k - 1/2) hbar = {target!r} is outside the oscillation range")
    return bisect_increasing(reduced_action, target, 1e-9, SEPARATRIX_ENERGY - 1e-9)


def reconstruct_odd(levels: Sequence[ReducedLevel], spectrum: Spectrum) -> list[QuantumLevel]:
    """Odd unreduced partners of the reduced levels.

    For reduced level k >= 1, the odd partner n = 2k - 1 sits where the reduced
    action equals (k - 1/2) hbar, which is I0 = (2k - 1) hbar. It is solved from
    the reduced action alone and must match the spectrum's level n = 2k - 1.
    The partner exists whenever (2k - 1) hbar < 8/pi. The level k = 0 has no
    odd partner.

    Above the separatrix the lifted symmetry swaps the two rotation circles,
    and sections even under it are antisymmetric combinations. Their support
    on the lower circle is the sigma^-_k state, which is the partner returned
    for a reduced level k above 2 (when k <= m_max).
    """
    hbar = spectrum.hbar
    out: list[QuantumLevel] = []
    for lv in levels:
        if lv.k == 0:
            continue
        if lv.energy < SEPARATRIX_ENERGY and abs(reduced_action(lv.energy) - lv.k * hbar) > 1e-9:
            raise ReconstructionError(f"reduced level k={lv.k} does not satisfy its own quantization rule")
        n = 2 * lv.k - 1
        if n <= spectrum.N:
            energy = odd_partner_energy(lv.k, hbar)
            partner = spectrum.level(Region.OSCILLATION, n)
            if abs(partner.energy - energy) > RECONSTRUCTION_TOL:
                raise ReconstructionError(
                    f"odd partner of k={lv.k} at e={energy!r} misses unreduced n={n} at e={partner.energy!r}"
                )
            out.append(partner)
        if lv.energy > SEPARATRIX_ENERGY and lv.k <= spectrum.m_max:
            partner = spectrum.level(Region.ROTATION_MINUS, lv.k)
            if abs(partner.energy - lv.energy) > RECONSTRUCTION_TOL:
                raise ReconstructionError(
                    f"reduced level k={lv.k} at e={lv.energy!r} misses sigma^-_{lv.k} at e={partner.energy!r}"
                )
            out.append(partner)
    return out


def partial_action(e: float, alpha0: float) -> float:
    """(1/2 pi) * 2 int_{-alpha0}^{alpha0} p dalpha on the oscillation at energy e.

    Equals I0(e) at alpha0 = alpha+. Evaluated in the variable phi with
    sin(alpha/2) = k sin(phi), k^2 = e/2, where the integrand is regular:
    (4e/pi) int_0^{phi0} cos^2 phi / sqrt(1 - k^2 sin^2 phi) dphi.
    """
    if not 0.0 < e < SEPARATRIX_ENERGY:
        raise DomainError(f"partial action is defined for 0 < e < 2, got {e!r}")
    k = math.sqrt(0.5 * e)
    ratio = min(1.0, math.sin(0.5 * min(abs(alpha0), math.pi)) / k)
    return _partial_action_phi(e, math.asin(ratio))


def _partial_action_phi(e: float, phi0: float) -> float:
    if phi0 <= 0.0:
        return 0.0
    k2 = 0.5 * e
    integral = quad(lambda s: math.cos(s) ** 2 / math.sqrt(1.0 - k2 * math.sin(s) ** 2), 0.0, phi0, 1e-14)
    return 4.0 * e / math.pi * integral


def orbit_pair_count(e: float, hbar: float, tol: float = 1e-8) -> int:
    """Number of symmetric point pairs (-alpha0, alpha0) on the level whose partial action is odd.

    Counts alpha0 in (0, alpha+] with partial_action(e, alpha0) = (2m - 1) hbar
    for some integer m >= 1. Each target is located by bisection on the
    increasing partial action. The endpoint alpha+ is included: there the
    partial action is the full I0 = n hbar, which is a target when n is odd.
    """
    if e == 0.0:
        return 0
    n = is_bohr_sommerfeld(e, hbar, tol) if 0.0 < e < SEPARATRIX_ENERGY else None
    if n is None:
        raise DomainError(f"e={e!r} is not an oscillation Bohr-Sommerfeld level for hbar={hbar!r}")
    full = component_action(e)
    count = 0
    m = 1
    while (2 * m - 1) * hbar <= full + tol:
        target = (2 * m - 1) * hbar
        if target >= full - tol:
            # The endpoint alpha+ itself: partial action is the whole I0 there.
            count += 1
        else:
            phi0 = bisect_increasing(lambda s: _partial_action_phi(e, s), target, 0.0, 0.5 * math.pi, 1e-13)
            count += 0.0 < phi0 < 0.5 * math.pi
        m += 1
    return count


def star_transform(coefficient: Callable[[float, float], complex]) -> Callable[[float, float], complex]:
    """Action of the lifted symmetry on a section's coefficient: z -> -z o reflect."""
    return lambda p, alpha: -coefficient(-p, -alpha)


def is_star_even(coefficient: Callable[[float, float], complex],
                 points: Iterable[tuple[float, float]], tol: float = 1e-12) -> bool:
    """True when z(-p, -alpha) = -z(p, alpha) on every sample point."""
    transformed = star_transform(coefficient)
    return all(abs(transformed(p, a) - coefficient(p, a)) <= tol for p, a in points)

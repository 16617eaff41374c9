"""Bohr-Sommerfeld energy levels of the pendulum.

Oscillation levels solve I0(e) = n hbar for n = 0..N, where N is the largest
integer with N hbar < 8/pi (the supremum of I0). Each rotation circle carries
levels I+-(e) = m hbar for m >= M = ceil((N + 1) / 2), the first m with
m hbar > 4/pi. Both actions increase strictly with e (dI/de = T / 2 pi > 0),
so every level is found by bisection on a bracket that excludes a 1e-9 band
around the separatrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .classical import (
    OSCILLATION_ACTION_MAX,
    ROTATION_ACTION_MIN,
    SEPARATRIX_BAND,
    SEPARATRIX_ENERGY,
    Region,
    component_action,
)
from .errors import DomainError, NoLevelError, RejectedHbarError

__all__ = [
    "QuantumLevel",
    "Spectrum",
    "HbarCheck",
    "ENERGY_TOL",
    "COLLISION_TOL",
    "oscillation_bound",
    "rotation_start",
    "bisect_increasing",
    "solve_level",
    "build_spectrum",
    "validate_hbar",
]

#: Bisection stops once the energy bracket is narrower than this.
ENERGY_TOL = 1e-12
#: Actions closer than this to a separatrix limit count as a collision.
COLLISION_TOL = 1e-9

_LOW_BRACKET = (SEPARATRIX_BAND, SEPARATRIX_ENERGY - SEPARATRIX_BAND)
_HIGH_START = SEPARATRIX_ENERGY + SEPARATRIX_BAND


@dataclass(frozen=True)
class QuantumLevel:
    """A Bohr-Sommerfeld level. For rotation regions ``n`` is the rotation quantum number m."""

    n: int
    region: Region
    energy: float


@dataclass(frozen=True)
class Spectrum:
    hbar: float
    N: int
    M: int
    m_max: int
    levels: tuple[QuantumLevel, ...]
    epsilon_gap: float

    def oscillation_levels(self) -> tuple[QuantumLevel, ...]:
        return tuple(lv for lv in self.levels if lv.region is not Region.ROTATION_PLUS
                     and lv.region is not Region.ROTATION_MINUS)

    def rotation_levels(self, region: Region) -> tuple[QuantumLevel, ...]:
        return tuple(lv for lv in self.levels if lv.region is region)

    def level(self, region: Region, n: int) -> QuantumLevel:
        """Look up a level; ``region`` may be OSCILLATION for n = 0 as well."""
        for lv in self.levels:
            same_region = lv.region is region or (
                region is Region.OSCILLATION and lv.region is Region.STABLE_EQUILIBRIUM
            )
            if same_region and lv.n == n:
                return lv
        raise NoLevelError(f"no level n={n} in region {region.value} of this spectrum")


class HbarCheck(NamedTuple):
    N: int
    M: int


def oscillation_bound(hbar: float) -> int:
    """N = max{n >= 0 : n hbar < 8/pi}."""
    if not hbar > 0.0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    n = math.floor(OSCILLATION_ACTION_MAX / hbar)
    while n > 0 and n * hbar >= OSCILLATION_ACTION_MAX:
        n -= 1
    while (n + 1) * hbar < OSCILLATION_ACTION_MAX:
        n += 1
    return n


def rotation_start(N: int) -> int:
    """M = ceil((N + 1) / 2): (N + 2)/2 for even N and (N + 1)/2 for odd N."""
    return (N + 2) // 2


def bisect_increasing(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    xtol: float = ENERGY_TOL,
) -> float:
    """Root of f(x) = target for increasing f with f(lo) <= target <= f(hi)."""
    f_lo, f_hi = f(lo) - target, f(hi) - target
    if f_lo > 0.0 or f_hi < 0.0:
        raise NoLevelError(f"target {target!r} is not bracketed by [{lo!r}, {hi!r}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        value = f(mid) - target
        if value == 0.0:
            return mid
        if value < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _grow_upper(f: Callable[[float], float], target: float, start: float) -> float:
    hi = max(2.0 * start, 4.0)
    while f(hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise NoLevelError(f"could not bracket action {target!r}")
    return hi


def solve_level(n: int, hbar: float, region: Region) -> float:
    """Energy e with I(e) = n hbar on the given region (I0 for oscillation, I+- for rotation)."""
    if n < 0:
        raise NoLevelError(f"quantum numbers are nonnegative, got {n}")
    if not hbar > 0.0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    target = n * hbar
    if region in (Region.OSCILLATION, Region.STABLE_EQUILIBRIUM):
        if n == 0:
            return 0.0
        if target >= OSCILLATION_ACTION_MAX:
            raise NoLevelError(f"n hbar = {target!r} exceeds the oscillation range (< 8/pi)")
        lo, hi = _LOW_BRACKET
        if component_action(hi) < target:
            raise NoLevelError(f"level n={n} lies inside the separatrix band")
        return bisect_increasing(component_action, target, lo, hi)
    if region.is_rotation:
        if target <= ROTATION_ACTION_MIN:
            raise NoLevelError(f"m hbar = {target!r} is below the rotation range (> 4/pi)")
        lo = _HIGH_START
        if component_action(lo) > target:
            raise NoLevelError(f"level m={n} lies inside the separatrix band")
        return bisect_increasing(component_action, target, lo, _grow_upper(component_action, target, lo))
    raise NoLevelError("the separatrix carries no Bohr-Sommerfeld level")


def _collision(hbar: float, N: int, M: int) -> tuple[int, str] | None:
    for n in (N, N + 1):
        if abs(n * hbar - OSCILLATION_ACTION_MAX) < COLLISION_TOL:
            return n, f"oscillation level n={n} has action {n * hbar!r}, on the separatrix value 8/pi"
    for m in (M - 1, M):
        if m >= 1 and abs(m * hbar - ROTATION_ACTION_MIN) < COLLISION_TOL:
            return m, f"rotation level m={m} has action {m * hbar!r}, on the separatrix value 4/pi"
    return None


def build_spectrum(hbar: float, m_max: int = 32) -> Spectrum:
    """All oscillation levels and the rotation levels m = M..m_max on both circles."""
    N = oscillation_bound(hbar)
    M = rotation_start(N)
    if m_max < M:
        raise DomainError(f"m_max={m_max} is below the first rotation quantum number M={M}")
    clash = _collision(hbar, N, M)
    if clash is not None:
        raise RejectedHbarError(hbar, clash[0], clash[1])

    levels: list[QuantumLevel] = [QuantumLevel(0, Region.STABLE_EQUILIBRIUM, 0.0)]
    for n in range(1, N + 1):
        levels.append(QuantumLevel(n, Region.OSCILLATION, solve_level(n, hbar, Region.OSCILLATION)))
    rotation = [(m, solve_level(m, hbar, Region.ROTATION_PLUS)) for m in range(M, m_max + 1)]
    # I+ and I- are the same function of e, so both circles share each energy.
    for region in (Region.ROTATION_PLUS, Region.ROTATION_MINUS):
        levels.extend(QuantumLevel(m, region, e) for m, e in rotation)

    distance = min(abs(lv.energy - SEPARATRIX_ENERGY) for lv in levels)
    if distance <= SEPARATRIX_BAND:
        raise RejectedHbarError(hbar, None, "a level energy lies within 1e-9 of the separatrix")
    return Spectrum(hbar, N, M, m_max, tuple(levels), 0.5 * distance)


def validate_hbar(hbar: float) -> HbarCheck:
    """Return (N, M) when hbar gives a usable lattice, else raise RejectedHbarError.

    A usable hbar keeps every action n hbar away from the separatrix limits
    8/pi and 4/pi and leaves at least one excited oscillation level (N >= 1).
    """
    N = oscillation_bound(hbar)
    M = rotation_start(N)
    clash = _collision(hbar, N, M)
    if clash is not None:
        raise RejectedHbarError(hbar, clash[0], clash[1])
    if N < 1:
        raise RejectedHbarError(hbar, 0, "N = 0: no oscillation level besides the equilibrium")
    return HbarCheck(N, M)

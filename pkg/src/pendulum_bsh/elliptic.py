"""Complete and incomplete elliptic integrals, plus a general adaptive quadrature.

Conventions follow the modulus form used throughout the package:

    K(k) = int_0^{pi/2} dphi / sqrt(1 - k^2 sin^2 phi)
    E(k) = int_0^{pi/2} sqrt(1 - k^2 sin^2 phi) dphi

K and E come from the arithmetic-geometric mean. The incomplete integral of the
first kind uses Carlson's symmetric form R_F. ``quad`` is an independent,
general-purpose route (global adaptive Gauss-Kronrod) and serves as the oracle
the closed forms are tested against.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable

from .errors import DomainError, QuadratureError

__all__ = [
    "complete_K",
    "complete_E",
    "complete_cos2",
    "incomplete_F",
    "carlson_rf",
    "quad",
]

_AGM_RTOL = 1e-15
_MAX_AGM_STEPS = 64


def _check_modulus(k: float, *, allow_one: bool) -> float:
    k = float(k)
    if not (0.0 <= k <= 1.0) or math.isnan(k):
        raise DomainError(f"elliptic modulus must lie in [0, 1], got {k!r}")
    if k == 1.0 and not allow_one:
        raise DomainError("K(k) diverges at k = 1 (separatrix)")
    return k


def _agm_series(k: float) -> tuple[float, float]:
    """Return (K(k), tail) where tail = sum_{n>=1} 2^(n-1) c_n^2 of the AGM sequence.

    With c_0 = k the Gauss-Legendre relation reads E = K (1 - k^2/2 - tail).
    The c_n are generated by c_{n+1} = c_n^2 / (4 a_{n+1}), which avoids the
    cancellation in (a_n - b_n)/2 for small k.
    """
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    tail = 0.0
    weight = 1.0
    for _ in range(_MAX_AGM_STEPS):
        if abs(a - b) <= _AGM_RTOL * a:
            break
        a_next = 0.5 * (a + b)
        b = math.sqrt(a * b)
        c = c * c / (4.0 * a_next)
        a = a_next
        tail += weight * c * c
        weight *= 2.0
    return math.pi / (2.0 * a), tail


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, for 0 <= k < 1."""
    k = _check_modulus(k, allow_one=False)
    return _agm_series(k)[0]


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind, for 0 <= k <= 1."""
    k = _check_modulus(k, allow_one=True)
    if k == 1.0:
        return 1.0
    K, tail = _agm_series(k)
    return K * (1.0 - 0.5 * k * k - tail)


def complete_cos2(k: float) -> float:
    """Return int_0^{pi/2} cos^2 phi / sqrt(1 - k^2 sin^2 phi) dphi for 0 <= k <= 1.

    This is (E - (1 - k^2) K) / k^2. For small k the quotient is evaluated from
    the AGM tail so that nothing cancels; near k = 1 the direct form is used.
    """
    k = _check_modulus(k, allow_one=True)
    if k == 1.0:
        return 1.0
    if k == 0.0:
        return math.pi / 4.0
    K, tail = _agm_series(k)
    k2 = k * k
    if k2 <= 0.5:
        return K * (0.5 - tail / k2)
    E = K * (1.0 - 0.5 * k2 - tail)
    return (E - (1.0 - k2) * K) / k2


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral R_F(x, y, z) for nonnegative arguments, at most one zero."""
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise DomainError(f"R_F needs nonnegative arguments with at most one zero, got {(x, y, z)!r}")
    for _ in range(200):
        mean = (x + y + z) / 3.0
        spread = max(abs(mean - x), abs(mean - y), abs(mean - z))
        # The truncated series below has relative error ~ (spread/mean)^6 / 4.
        if spread <= 1e-3 * mean:
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    mean = (x + y + z) / 3.0
    dx = 1.0 - x / mean
    dy = 1.0 - y / mean
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / math.sqrt(mean)


def incomplete_F(phi: float, k: float) -> float:
    """Incomplete elliptic integral of the first kind F(phi, k) for any real phi.

    Uses F(phi + j pi) = F(phi) + 2 j K(k), so k = 1 is only accepted when
    |phi| < pi/2.
    """
    k = _check_modulus(k, allow_one=True)
    j = round(phi / math.pi)
    reduced = phi - j * math.pi
    s = math.sin(reduced)
    c = math.cos(reduced)
    base = s * carlson_rf(c * c, (1.0 - k * s) * (1.0 + k * s), 1.0) if s != 0.0 else 0.0
    if j == 0:
        return base
    return base + 2.0 * j * complete_K(k)


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (nonnegative half).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
# Weights of the embedded 7-point Gauss rule, attached to _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    f_center = f(center)
    kronrod = _WGK[7] * f_center
    gauss = _WG[3] * f_center
    for j in range(7):
        dx = half * _XGK[j]
        pair = f(center - dx) + f(center + dx)
        kronrod += _WGK[j] * pair
        if j % 2 == 1:
            gauss += _WG[j // 2] * pair
    return kronrod * half, abs((kronrod - gauss) * half)


def quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_intervals: int = 2**20,
) -> float:
    """Integrate ``f`` over [a, b] by globally adaptive Gauss-Kronrod bisection.

    The interval with the largest error estimate is split until the summed
    estimate drops below ``tol`` (or below a round-off floor of 50 ulp of the
    result). Raises QuadratureError, carrying the best estimate and its error
    bound, if ``max_intervals`` subintervals are not enough.
    """
    if not a < b:
        raise DomainError(f"quad needs a < b, got a={a!r}, b={b!r}")
    if not tol > 0.0:
        raise DomainError(f"quad needs tol > 0, got {tol!r}")

    value, err = _gk15(f, a, b)
    if not math.isfinite(value):
        raise DomainError("integrand is not finite on the interval")
    heap: list[tuple[float, float, float, float]] = [(-err, a, b, value)]
    total, total_err = value, err
    while total_err > max(tol, 50.0 * 2.2e-16 * abs(total)):
        if len(heap) >= max_intervals:
            raise QuadratureError("interval budget exhausted", total, total_err)
        neg_err, lo, hi, part = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError("interval cannot be bisected further", total, total_err)
        left, left_err = _gk15(f, lo, mid)
        right, right_err = _gk15(f, mid, hi)
        total += left + right - part
        total_err += left_err + right_err + neg_err
        heapq.heappush(heap, (-left_err, lo, mid, left))
        heapq.heappush(heap, (-right_err, mid, hi, right))
    # Re-sum from the leaves so the running update's round-off does not accumulate.
    return math.fsum(item[3] for item in heap)

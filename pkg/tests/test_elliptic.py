import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from pendulum_bsh.elliptic import (
    carlson_rf,
    complete_cos2,
    complete_E,
    complete_K,
    incomplete_F,
    quad,
)
from pendulum_bsh.errors import DomainError, QuadratureError


def simpson(f, a, b, tol=1e-13, depth=60):
    """Adaptive Simpson, used only as an independent oracle."""

    def rule(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = rule(a, fa, m, fm)
        rm, frm, right = rule(m, fm, b, fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1))

    fa, fb = f(a), f(b)
    m, fm, whole = rule(a, fa, b, fb)
    return recurse(a, fa, b, fb, m, fm, whole, tol, depth)


def K_oracle(k):
    return simpson(lambda s: 1.0 / math.sqrt(1.0 - (k * math.sin(s)) ** 2), 0.0, 0.5 * math.pi)


def E_oracle(k):
    return simpson(lambda s: math.sqrt(1.0 - (k * math.sin(s)) ** 2), 0.0, 0.5 * math.pi)


def cos2_oracle(k):
    return simpson(lambda s: math.cos(s) ** 2 / math.sqrt(1.0 - (k * math.sin(s)) ** 2), 0.0, 0.5 * math.pi)


MODULI = [0.0, 1e-4, 0.1, 0.3, 0.5, 0.7071, 0.9, 0.99, 0.999]


@pytest.mark.parametrize("k", MODULI)
def test_complete_integrals_match_quadrature_oracle(k):
    assert complete_K(k) == pytest.approx(K_oracle(k), rel=1e-11)
    assert complete_E(k) == pytest.approx(E_oracle(k), rel=1e-11)
    assert complete_cos2(k) == pytest.approx(cos2_oracle(k), rel=1e-11)


@pytest.mark.parametrize("k", MODULI)
def test_complete_integrals_match_scipy(k):
    assert complete_K(k) == pytest.approx(special.ellipk(k * k), rel=1e-14)
    assert complete_E(k) == pytest.approx(special.ellipe(k * k), rel=1e-14)


def test_special_values():
    assert complete_K(0.0) == pytest.approx(0.5 * math.pi, abs=1e-15)
    assert complete_E(0.0) == pytest.approx(0.5 * math.pi, abs=1e-15)
    assert complete_E(1.0) == 1.0
    assert complete_cos2(0.0) == pytest.approx(0.25 * math.pi, abs=1e-15)
    assert complete_cos2(1.0) == pytest.approx(1.0, abs=1e-15)


def test_cos2_small_modulus_keeps_its_series():
    # cos2(k) = pi/4 (1 + k^2/8 + ...); the closed form (E - k'^2 K)/k^2 would
    # lose every digit of the k^2 term here.
    k = 1e-5
    assert complete_cos2(k) == pytest.approx(0.25 * math.pi * (1.0 + k * k / 8.0), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_legendre_relation(k):
    kp = math.sqrt(1.0 - k * k)
    K, E, Kp, Ep = complete_K(k), complete_E(k), complete_K(kp), complete_E(kp)
    assert E * Kp + Ep * K - K * Kp == pytest.approx(0.5 * math.pi, abs=1e-13)


def test_carlson_rf_identities():
    assert carlson_rf(2.0, 2.0, 2.0) == pytest.approx(2.0 ** -0.5, rel=1e-15)
    assert carlson_rf(0.0, 1.0, 1.0) == pytest.approx(0.5 * math.pi, rel=1e-14)
    # Homogeneity of degree -1/2 and symmetry.
    assert carlson_rf(4.0, 8.0, 12.0) == pytest.approx(0.5 * carlson_rf(1.0, 2.0, 3.0), rel=1e-14)
    assert carlson_rf(3.0, 1.0, 2.0) == pytest.approx(carlson_rf(1.0, 2.0, 3.0), rel=1e-15)


@pytest.mark.parametrize("args", [(-1.0, 1.0, 1.0), (0.0, 0.0, 1.0)])
def test_carlson_rf_domain(args):
    with pytest.raises(DomainError):
        carlson_rf(*args)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-1.5, max_value=1.5), st.floats(min_value=0.0, max_value=0.95))
def test_incomplete_F_matches_scipy(phi, k):
    assert incomplete_F(phi, k) == pytest.approx(special.ellipkinc(phi, k * k), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("k", [0.2, 0.8, 0.99])
def test_incomplete_F_quarter_period_and_extension(k):
    K = complete_K(k)
    assert incomplete_F(0.5 * math.pi, k) == pytest.approx(K, rel=1e-14)
    assert incomplete_F(math.pi + 0.3, k) == pytest.approx(2.0 * K + incomplete_F(0.3, k), rel=1e-14)
    assert incomplete_F(-0.7, k) == pytest.approx(-incomplete_F(0.7, k), rel=1e-15)


@pytest.mark.parametrize("degree", range(0, 24, 3))
def test_quad_exact_on_polynomials(degree):
    exact = (2.0 ** (degree + 1) - (-1.0) ** (degree + 1)) / (degree + 1)
    assert quad(lambda x: x ** degree, -1.0, 2.0) == pytest.approx(exact, rel=1e-13)


def test_quad_handles_endpoint_singularity_of_log_type():
    # int_0^1 -log(x) dx = 1; the integrand is never evaluated at x = 0.
    assert quad(lambda x: -math.log(x), 0.0, 1.0, tol=1e-10) == pytest.approx(1.0, abs=1e-9)


def test_quad_errors():
    with pytest.raises(DomainError):
        quad(math.sin, 1.0, 0.0)
    with pytest.raises(DomainError):
        quad(math.sin, 0.0, 1.0, tol=0.0)
    with pytest.raises(QuadratureError) as info:
        quad(lambda x: math.sin(1.0 / x), 1e-9, 1.0, tol=1e-15, max_intervals=16)
    assert math.isfinite(info.value.estimate)


@pytest.mark.parametrize("k", [-0.1, 1.1, float("nan")])
def test_modulus_domain(k):
    with pytest.raises(DomainError):
        complete_K(k)


def test_K_diverges_at_one():
    with pytest.raises(DomainError):
        complete_K(1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pendulum_bsh import classical as cl
from pendulum_bsh import minus_one_rep as odd
from pendulum_bsh import reduction_one_rep as red
from pendulum_bsh.errors import DomainError
from pendulum_bsh.spectrum import build_spectrum

coords = st.floats(min_value=-3.0, max_value=3.0)
angles = st.floats(min_value=-math.pi, max_value=math.pi)


@settings(max_examples=80, deadline=None)
@given(coords, coords, coords, angles)
def test_invariants_satisfy_the_relations(x, y, p, alpha):
    t = odd.invariants8((x, y), cl.PhasePoint(p, alpha))
    assert np.max(np.abs(odd.relations_residual(t))) < 1e-11
    flipped = odd.invariants8(*odd.reflect_bundle((x, y), cl.PhasePoint(p, alpha)))
    assert np.allclose(flipped.as_array(), t.as_array(), atol=1e-12)


def test_relations_derivative_matches_finite_differences():
    t = odd.invariants8((0.4, -1.3), cl.PhasePoint(0.9, 0.7))
    base = t.as_array()
    step = 1e-6
    numeric = np.empty((5, 8))
    for j in range(8):
        shift = np.zeros(8)
        shift[j] = step

        def residual(v):
            return odd.relations_residual(odd.InvariantTuple(tuple(v[:3]), tuple(v[3:])))

        numeric[:, j] = (residual(base + shift) - residual(base - shift)) / (2 * step)
    assert np.allclose(odd.relations_derivative(t), numeric, atol=1e-8)


def test_exact_derivative_has_rank_four_on_the_variety():
    t = odd.invariants8((1.0, 1.0), cl.PhasePoint(1.0, math.pi / 3))
    assert np.linalg.matrix_rank(odd.relations_derivative(t), tol=1e-8) == 4


def test_rank_example_regular():
    t = odd.invariants8((1.0, 1.0), cl.PhasePoint(1.0, math.pi / 3))
    result = odd.jacobian_rank(t)
    assert result.rank == 5 and result.kind is odd.Stratum.REGULAR
    assert odd.in_regular_set(t)


@pytest.mark.parametrize("z, pt", [
    ((1.0, 1.0), cl.PhasePoint(0.0, 1.0)),
    ((0.3, -2.0), cl.PhasePoint(0.0, math.pi)),
    ((0.0, 0.0), cl.PhasePoint(1.2, 0.5)),
    ((1.0, 2.0), cl.PhasePoint(0.0, 0.0)),
])
def test_rank_examples_singular(z, pt):
    t = odd.invariants8(z, pt)
    result = odd.jacobian_rank(t)
    assert result.rank <= 4 and result.kind is odd.Stratum.SINGULAR
    assert not odd.in_regular_set(t)


def test_rank_rejects_points_off_the_variety():
    with pytest.raises(DomainError):
        odd.jacobian_rank(odd.InvariantTuple((0.5, 0.5, 1.0), (1.0, 1.0, 1.0, 1.0, 1.0)))


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.01, max_value=3.0), st.floats(min_value=-3.0, max_value=3.0),
       st.floats(min_value=-3.0, max_value=3.0))
def test_pi_inverse_undoes_psi_exactly(t1, t2, rho1, nu1, nu2):
    if nu1 == 0.0 and nu2 == 0.0:
        nu1 = 1.0
    b = odd.ReducedBundlePoint((t1, t2, rho1 + 1.0 - t1), (nu1, nu2))
    assert odd.pi_inverse(odd.psi(b)) == b


def test_psi_undoes_pi_inverse_on_images():
    rng = np.random.default_rng(11)
    for _ in range(200):
        x, y, p = rng.normal(size=3)
        if abs(p) < 0.05:
            continue
        t = odd.invariants8((x, y), cl.PhasePoint(p, rng.uniform(-math.pi, math.pi)))
        back = odd.psi(odd.pi_inverse(t))
        assert np.allclose(back.as_array(), t.as_array(), rtol=1e-12, atol=1e-12)


def test_bundle_maps_need_positive_rho1():
    with pytest.raises(DomainError):
        odd.psi(odd.ReducedBundlePoint((1.0, 0.0, 0.0), (1.0, 0.0)))
    with pytest.raises(DomainError):
        odd.pi_inverse(odd.invariants8((1.0, 0.0), cl.PhasePoint(0.0, 0.3)))


@pytest.mark.parametrize("hbar", [0.4, 0.35])
def test_even_and_odd_reconstructions_partition_the_oscillation_levels(hbar):
    spectrum = build_spectrum(hbar, 16)
    levels = odd.odd_reduced_spectrum(hbar, 16)
    evens = [lv for lv in red.reconstruct_even(levels, spectrum) if lv.energy < 2.0]
    odds = [lv for lv in odd.reconstruct_odd(levels, spectrum) if lv.energy < 2.0]
    assert all(lv.n % 2 == 0 for lv in evens)
    assert all(lv.n % 2 == 1 for lv in odds)
    assert sorted(lv.n for lv in evens + odds) == list(range(spectrum.N + 1))


def test_odd_partner_energies_are_independent_solutions():
    spectrum = build_spectrum(0.4)
    for k in (1, 2, 3):
        energy = odd.odd_partner_energy(k, 0.4)
        assert energy == pytest.approx(spectrum.level(cl.Region.OSCILLATION, 2 * k - 1).energy, abs=1e-8)
    with pytest.raises(DomainError):
        odd.odd_partner_energy(0, 0.4)


def test_odd_rotation_partners_sit_on_the_minus_circle():
    spectrum = build_spectrum(0.4, 10)
    partners = odd.reconstruct_odd(odd.odd_reduced_spectrum(0.4, 10), spectrum)
    above = [lv for lv in partners if lv.energy > 2.0]
    assert above and all(lv.region is cl.Region.ROTATION_MINUS for lv in above)


def count_by_grid(e, hbar, points=20_001):
    """Oracle: count odd multiples of hbar crossed by the partial action on a grid in phi."""
    k2 = 0.5 * e
    phi = np.linspace(0.0, 0.5 * math.pi, points)
    integrand = np.cos(phi) ** 2 / np.sqrt(1.0 - k2 * np.sin(phi) ** 2)
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(phi))])
    partial = 4.0 * e / math.pi * cumulative
    roots = 0
    for m in range(1, 64):
        gap = partial - (2 * m - 1) * hbar
        # A root in (0, phi_max] is a sign change, or the endpoint landing on
        # the target to within the trapezoid error.
        roots += bool(np.any((gap[:-1] < 0.0) & (gap[1:] >= 0.0))) or abs(gap[-1]) < 1e-6
    return roots, partial[-1]


@pytest.mark.parametrize("hbar", [0.4, 0.35, 0.7])
def test_orbit_pair_count(hbar):
    spectrum = build_spectrum(hbar, 8)
    for lv in spectrum.oscillation_levels():
        count = odd.orbit_pair_count(lv.energy, hbar)
        assert count == (lv.n + 1) // 2
        if lv.energy > 0.0:
            oracle, endpoint = count_by_grid(lv.energy, hbar)
            assert endpoint == pytest.approx(lv.n * hbar, rel=1e-6)
            assert count == oracle


def test_partial_action_reaches_the_full_action():
    e = 1.3
    assert odd.partial_action(e, cl.turning_angle(e)) == pytest.approx(cl.component_action(e), rel=1e-12)
    assert odd.partial_action(e, 0.0) == 0.0
    with pytest.raises(DomainError):
        odd.partial_action(2.5, 1.0)


def test_pair_count_needs_a_level():
    with pytest.raises(DomainError):
        odd.orbit_pair_count(1.0, 0.4)


def test_star_parity():
    samples = [(0.3, 1.0), (-1.2, 0.4), (2.0, -2.5)]
    assert odd.is_star_even(lambda p, a: p * math.cos(a), samples)
    assert not odd.is_star_even(lambda p, a: math.cos(a) + 0j, samples)
    twice = odd.star_transform(odd.star_transform(lambda p, a: p + 1j * a))
    assert all(twice(p, a) == p + 1j * a for p, a in samples)

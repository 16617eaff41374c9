import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pendulum_bsh import classical as cl
from pendulum_bsh.errors import DomainError
from pendulum_bsh.holonomy import holonomy_phase, is_bohr_sommerfeld, parallel_transport
from pendulum_bsh.spectrum import build_spectrum


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.05, max_value=6.0).filter(lambda e: abs(e - 2.0) > 1e-3),
       st.floats(min_value=0.1, max_value=1.0))
def test_transport_matches_closed_form(e, hbar):
    assert abs(parallel_transport(e, 1.0, hbar) - holonomy_phase(e, hbar)) < 1e-5


def test_transport_is_linear_in_the_fiber_value():
    z0 = 0.3 - 1.7j
    assert parallel_transport(1.3, z0, 0.4) == pytest.approx(z0 * parallel_transport(1.3, 1.0, 0.4), abs=1e-8)


def test_phase_is_the_action_over_hbar():
    e, hbar = 0.8, 0.25
    expected = cmath.exp(2j * math.pi * cl.component_action(e) / hbar)
    assert holonomy_phase(e, hbar) == expected


def test_trivial_holonomy_exactly_on_levels():
    spectrum = build_spectrum(0.4, 10)
    for lv in spectrum.levels:
        if lv.energy == 0.0:
            continue
        assert abs(parallel_transport(lv.energy, 1.0, 0.4) - 1.0) < 1e-5
        assert is_bohr_sommerfeld(lv.energy, 0.4) == lv.n


def test_mid_gap_energies_are_far_from_trivial():
    spectrum = build_spectrum(0.4, 10)
    energies = sorted({lv.energy for lv in spectrum.levels})
    mids = [0.5 * (a + b) for a, b in zip(energies, energies[1:])]
    assert all(abs(holonomy_phase(e, 0.4) - 1.0) > 0.1 for e in mids)
    assert all(is_bohr_sommerfeld(e, 0.4) is None for e in mids)


def test_near_separatrix_transport():
    for e in (2.0 - 1e-4, 2.0 + 1e-4):
        assert abs(parallel_transport(e, 1.0, 0.5) - holonomy_phase(e, 0.5)) < 1e-6


@pytest.mark.parametrize("e", [0.0, 2.0, -1.0])
def test_transport_needs_regular_orbit(e):
    with pytest.raises(DomainError):
        parallel_transport(e, 1.0, 0.4)


def test_transport_argument_checks():
    with pytest.raises(DomainError):
        parallel_transport(1.0, 0.0, 0.4)
    with pytest.raises(DomainError):
        holonomy_phase(1.0, -0.4)


def test_equilibrium_is_level_zero():
    assert is_bohr_sommerfeld(0.0, 0.4) == 0


def test_holonomy_scan_zeros_line_up_with_levels():
    """Between consecutive grid points the phase winds once per level."""
    hbar = 0.4
    spectrum = build_spectrum(hbar, 8)
    grid = np.linspace(0.05, 6.0, 4000)
    grid = grid[np.abs(grid - 2.0) > 1e-6]
    ratio = np.array([cl.component_action(e) / hbar for e in grid])
    crossings = [0.5 * (grid[i] + grid[i + 1]) for i in range(len(grid) - 1)
                 if math.floor(ratio[i]) != math.floor(ratio[i + 1]) and abs(grid[i] - 2.0) > 0.01]
    expected = sorted({lv.energy for lv in spectrum.levels if 0.05 < lv.energy < 6.0})
    assert len(crossings) == len(expected)
    assert np.allclose(crossings, expected, atol=2e-3)

"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line in ``RESULTS``; ``conftest.py`` prints
them at the end of the run, so they show up even with output capture on.
"""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from pendulum_bsh import classical as cl
from pendulum_bsh import holonomy as hol
from pendulum_bsh import minus_one_rep as odd
from pendulum_bsh import reduction_one_rep as red
from pendulum_bsh.checks import _dirac_residual, _on_variety_point, _random_polynomial, _variety_sample
from pendulum_bsh.spectrum import build_spectrum

RESULTS: dict[int, str] = {}


def record(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {title} ({detail})"
    RESULTS[number] = line
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def spectrum():
    return build_spectrum(0.4)


def test_criterion_01_separatrix_limits():
    below = abs(cl.action(2.0 - 1e-6, cl.Region.OSCILLATION) - 8.0 / math.pi)
    above = abs(cl.action(2.0 + 1e-6, cl.Region.ROTATION_PLUS) - 4.0 / math.pi)
    record(1, "separatrix action limits", below < 1e-3 and above < 1e-3,
           f"|I0 - 8/pi| = {below:.2e}, |I+- - 4/pi| = {above:.2e}, tol 1e-3")


def test_criterion_02_harmonic_and_rotor_limits():
    harmonic = abs(cl.action(1e-3, cl.Region.OSCILLATION) / 1e-3 - 1.0)
    rotor = abs(cl.action(200.0, cl.Region.ROTATION_PLUS) / math.sqrt(400.0) - 1.0)
    period = abs(cl.period(1e-4) - 2.0 * math.pi)
    record(2, "harmonic and rotor limits", harmonic < 1e-3 and rotor < 1e-2 and period < 1e-3,
           f"{harmonic:.2e} < 1e-3, {rotor:.2e} < 1e-2, {period:.2e} < 1e-3")


def test_criterion_03_period_action_identity():
    step = 1e-5
    grid = np.concatenate([np.linspace(0.1, 1.9, 20), np.linspace(2.1, 6.0, 20)])
    worst = 0.0
    for e in grid:
        derivative = (cl.component_action(e + step) - cl.component_action(e - step)) / (2 * step)
        expected = cl.period(e) / (2 * math.pi)
        worst = max(worst, abs(derivative - expected) / expected)
    record(3, "period-action identity", worst < 1e-4, f"max relative {worst:.2e} over 40 energies, tol 1e-4")


def test_criterion_04_holonomy_equivalence(spectrum):
    on_levels = max(abs(hol.parallel_transport(lv.energy, 1.0, 0.4) - 1.0)
                    for lv in spectrum.levels if lv.energy > 0.0)
    energies = sorted({lv.energy for lv in spectrum.levels})
    mids = [0.5 * (a + b) for a, b in zip(energies, energies[1:])][:20]
    off_levels = min(abs(hol.holonomy_phase(e, 0.4) - 1.0) for e in mids)
    rng = np.random.default_rng(2024)
    agreement = 0.0
    for e in rng.uniform(0.05, 6.0, 50):
        if abs(e - 2.0) < 1e-3:
            e += 0.01
        agreement = max(agreement, abs(hol.parallel_transport(e, 1.0, 0.4) - hol.holonomy_phase(e, 0.4)))
    passed = on_levels < 1e-5 and off_levels > 0.1 and len(mids) == 20 and agreement < 1e-5
    record(4, "holonomy equivalence", passed,
           f"levels {on_levels:.2e} < 1e-5, mid-gap min {off_levels:.3f} > 0.1, ODE vs phase {agreement:.2e} < 1e-5")


def test_criterion_05_operator_algebra():
    from pendulum_bsh import operators as ops
    from pendulum_bsh.checks import random_sparse_state

    worst_exact = 0.0
    for hbar in (0.4, 0.35):  # N = 6 (even) and N = 7 (odd)
        spectrum = build_spectrum(hbar, 12)
        lattice = ops.Lattice.of(spectrum)
        worst_exact = max(worst_exact, *_dirac_residual(spectrum))
        for side in (ops.Sector.PLUS, ops.Sector.MINUS):
            lower, raise_ = ops.lowering(side, spectrum), ops.raising(side, spectrum)
            worst_exact = max(worst_exact, lower(lattice.zero(0)).norm())
            top = ops.QuantumState.basis(lattice.zero(lattice.N))
            bottom = ops.QuantumState.basis(ops.BasisIndex(side, lattice.M))
            worst_exact = max(worst_exact, (lower(bottom) - top).norm(), (raise_(top) - bottom).norm())
    spectrum = build_spectrum(0.4, 12)
    lattice = ops.Lattice.of(spectrum)
    rng = np.random.default_rng(5)
    pairing = 0.0
    for side in (ops.Sector.PLUS, ops.Sector.MINUS):
        lower, raise_ = ops.lowering(side, spectrum), ops.raising(side, spectrum)
        edge = frozenset({ops.BasisIndex(side, spectrum.m_max)})
        for _ in range(50):
            psi, phi = random_sparse_state(lattice, rng, 6, edge), random_sparse_state(lattice, rng, 6)
            pairing = max(pairing, abs(raise_(psi).inner(phi) - psi.inner(lower(phi))))
    small = build_spectrum(0.4, 8)
    gens = ops.ladder_generators(small)
    indices = ops.Lattice.of(small).indices()
    missing = 0
    for i in indices:
        for j in indices:
            state = ops.QuantumState.basis(i)
            for name in ops.transitivity_witness(i, j, small, gens):
                state = gens[name](state)
            missing += list(state) != [j]
    passed = worst_exact == 0.0 and pairing < 1e-14 and missing == 0
    record(5, "operator algebra", passed,
           f"exact relations residual {worst_exact}, pairing {pairing:.1e} < 1e-14, "
           f"{len(indices) ** 2 - missing}/{len(indices) ** 2} witnesses")


def test_criterion_06_reduction_suite():
    casimir_drift = 0.0
    for e in (0.6, 1.5, 3.0):
        tau = red.orbit_map(cl.PhasePoint(math.sqrt(2 * e), 0.0))
        casimir_drift = max(casimir_drift, abs(red.casimir(red.reduced_flow(tau, 10 * red.reduced_period(e)))))
    rng = np.random.default_rng(6)
    equivariance = 0.0
    for _ in range(10):
        pt = cl.PhasePoint(rng.uniform(-2.5, 2.5), rng.uniform(-math.pi, math.pi))
        t = rng.uniform(0.1, 3.0)
        gap = np.array(red.orbit_map(cl.flow(pt, t))) - np.array(red.reduced_flow(red.orbit_map(pt), t))
        equivariance = max(equivariance, float(np.max(np.abs(gap))))
    antisym = leibniz = jacobi = 0.0
    for _ in range(100):
        tau = _on_variety_point(rng)
        F, G, H = (_random_polynomial(rng) for _ in range(3))
        antisym = max(antisym, abs(red.bracket(F, G, tau) + red.bracket(G, F, tau)))
        leibniz = max(leibniz, abs(red.bracket(F, G * H, tau) - G(tau) * red.bracket(F, H, tau)
                                   - red.bracket(F, G, tau) * H(tau)))

        def nested(A, B, C):
            return red.bracket(A, red.ScalarField(lambda x: red.bracket(B, C, x)), tau)

        jacobi = max(jacobi, abs(nested(F, G, H) + nested(G, H, F) + nested(H, F, G)))
    factor = 0.0
    for e in np.concatenate([np.linspace(0.05, 1.95, 20), np.linspace(2.05, 10.0, 20)]):
        expected = cl.component_action(e) / 2 if e < 2 else cl.component_action(e)
        factor = max(factor, abs(red.reduced_action(e) - expected))
    passed = (casimir_drift < 1e-7 and equivariance < 1e-6 and antisym == 0.0
              and leibniz < 1e-8 and jacobi < 1e-6 and factor < 1e-10)
    record(6, "reduction suite", passed,
           f"Casimir {casimir_drift:.1e}, equivariance {equivariance:.1e}, antisymmetry {antisym}, "
           f"Leibniz {leibniz:.1e}, Jacobi {jacobi:.1e}, reduced action {factor:.1e}")


def test_criterion_07_parity_reconstruction(spectrum):
    levels = red.reduced_spectrum(0.4, spectrum.m_max)
    evens = [lv for lv in red.reconstruct_even(levels, spectrum) if lv.energy < 2.0]
    odds = [lv for lv in odd.reconstruct_odd(odd.odd_reduced_spectrum(0.4, spectrum.m_max), spectrum)
            if lv.energy < 2.0]
    # Reconstructed energies come from the reduced problems alone.
    recovered = {}
    for level in levels:
        if level.energy < 2.0:
            recovered[2 * level.k] = level.energy
        if 1 <= level.k and 2 * level.k - 1 <= spectrum.N:
            recovered[2 * level.k - 1] = odd.odd_partner_energy(level.k, 0.4)
    worst = max(abs(recovered[lv.n] - lv.energy) for lv in spectrum.oscillation_levels())
    parity = all(lv.n % 2 == 0 for lv in evens) and all(lv.n % 2 == 1 for lv in odds)
    covered = sorted(lv.n for lv in evens + odds) == list(range(spectrum.N + 1))
    record(7, "parity reconstruction", worst < 1e-8 and parity and covered,
           f"evens {[lv.n for lv in evens]}, odds {[lv.n for lv in odds]}, max energy gap {worst:.1e} < 1e-8")


def test_criterion_08_orbit_pair_count(spectrum):
    counts = {lv.n: odd.orbit_pair_count(lv.energy, 0.4) for lv in spectrum.oscillation_levels()}
    passed = all(count == (n + 1) // 2 for n, count in counts.items())
    record(8, "orbit pair count", passed, f"counts {counts}")


def test_criterion_09_stratification():
    rng = np.random.default_rng(9)
    samples = [_variety_sample(rng, i) for i in range(1000)]
    mismatched = sum((odd.jacobian_rank(t).kind is odd.Stratum.REGULAR) != odd.in_regular_set(t) for t in samples)
    regular = sum(odd.in_regular_set(t) for t in samples)
    roundtrip = 0.0
    for t in samples:
        if t.rho1 > 0.0 and (t.sigma[3] != 0.0 or t.sigma[4] != 0.0):
            scale = max(1.0, float(np.max(np.abs(t.as_array()))))
            roundtrip = max(roundtrip, float(np.max(np.abs(odd.psi(odd.pi_inverse(t)).as_array()
                                                           - t.as_array()))) / scale)
            b = odd.pi_inverse(t)
            assert odd.pi_inverse(odd.psi(b)) == b
    record(9, "stratification", mismatched == 0 and roundtrip < 1e-12,
           f"{mismatched} misclassified of 1000 ({regular} regular), round trip {roundtrip:.1e} < 1e-12")


def test_criterion_10_determinism(tmp_path):
    env = dict(os.environ, PENDULUM_BSH_SEED="0")
    outputs = []
    codes = []
    for run in range(2):
        target = tmp_path / f"report{run}.json"
        result = subprocess.run(
            [sys.executable, "-m", "pendulum_bsh", "verify", "--hbar", "0.4", "all", "--out", str(target)],
            env=env, capture_output=True, text=True,
        )
        codes.append(result.returncode)
        outputs.append(target.read_bytes())
    record(10, "determinism", codes == [0, 0] and outputs[0] == outputs[1],
           f"exit codes {codes}, reports identical: {outputs[0] == outputs[1]}")

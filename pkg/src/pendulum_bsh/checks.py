"""Property suites run by ``pendulum-bsh verify``.

Each suite returns a list of Check records (name, measured residual,
tolerance, pass flag). Random samples come from a numpy Generator seeded by
the caller, so a fixed seed reproduces the report exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import classical as cl
from . import holonomy as hol
from . import minus_one_rep as odd
from . import operators as ops
from . import reduction_one_rep as red
from .spectrum import Spectrum, build_spectrum, oscillation_bound

__all__ = ["Check", "SUITES", "run_suites", "period_action_grid", "random_sparse_state"]


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    residual: float
    tolerance: float
    exact: bool = False

    @property
    def passed(self) -> bool:
        if self.exact:
            return self.residual == 0.0
        return bool(self.residual < self.tolerance)

    def as_dict(self) -> dict[str, object]:
        return {
            "suite": self.suite,
            "name": self.name,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
        }


def period_action_grid() -> list[float]:
    """40 energies: 20 on [0.1, 1.9] and 20 on [2.1, 6]."""
    return [float(e) for e in np.concatenate([np.linspace(0.1, 1.9, 20), np.linspace(2.1, 6.0, 20)])]


def _classical(spectrum: Spectrum, tol: float, rng: np.random.Generator) -> list[Check]:
    out = []
    step = 1e-5
    worst = 0.0
    for e in period_action_grid():
        derivative = (cl.component_action(e + step) - cl.component_action(e - step)) / (2.0 * step)
        expected = cl.period(e) / (2.0 * math.pi)
        worst = max(worst, abs(derivative - expected) / expected)
    out.append(Check("classical", "period-action identity dI/de = T/2pi (relative)", worst, 1e-4))
    gap = abs(cl.full_action(2.0 - 1e-8) - cl.full_action(2.0 + 1e-8))
    out.append(Check("classical", "full action continuous across the separatrix", gap, 1e-3))

    drift = reversal = 0.0
    for _ in range(4):
        pt = cl.PhasePoint(float(rng.uniform(-2.5, 2.5)), float(rng.uniform(-math.pi, math.pi)))
        if abs(cl.hamiltonian(pt) - 2.0) < 0.05:
            pt = cl.PhasePoint(0.5 * pt.p, pt.alpha)
        end = cl.flow(pt, 100.0, tol)
        drift = max(drift, abs(cl.hamiltonian(end) - cl.hamiltonian(pt)))
        back = cl.flow(cl.flow(pt, 10.0, tol), -10.0, tol)
        reversal = max(reversal, abs(back.p - pt.p), abs(back.alpha - pt.alpha))
    out.append(Check("classical", "energy drift along flow over t=100", drift, 10.0 * tol))
    out.append(Check("classical", "flow reversibility over t=10", reversal, 1e-8))

    spread = 0.0
    for e in (0.5, 1.5, 3.0):
        T = cl.period(e)
        reference = cl.component_action(e)
        for alpha in np.linspace(-0.9, 0.9, 5) * (cl.turning_angle(e) if e < 2.0 else math.pi):
            p = math.sqrt(max(0.0, 2.0 * (e - 2.0 * math.sin(0.5 * alpha) ** 2)))
            start = cl.PhasePoint(p, float(alpha))
            measured, end = cl.loop_action(start, T)
            closure = max(abs(end.p - start.p), abs(cl.normalize_angle(end.alpha - start.alpha)))
            spread = max(spread, abs(measured - reference), closure)
    out.append(Check("classical", "action and period independent of the starting point", spread, 1e-8))
    return out


def _holonomy(spectrum: Spectrum, tol: float, rng: np.random.Generator) -> list[Check]:
    out = []
    hbar = spectrum.hbar
    worst = modulus = 0.0
    for _ in range(50):
        e = float(rng.uniform(0.05, 6.0))
        if abs(e - 2.0) < 1e-3:
            e += 0.01
        h = float(rng.uniform(0.1, 1.0))
        z = hol.parallel_transport(e, 1.0, h, tol)
        worst = max(worst, abs(z - hol.holonomy_phase(e, h)))
        modulus = max(modulus, abs(abs(z) - 1.0))
    out.append(Check("holonomy", "transport ODE vs closed-form phase, 50 random (e, hbar)", worst, 1e-5))
    out.append(Check("holonomy", "transport preserves |z|", modulus, 1e-8))

    levels = [lv for lv in spectrum.levels if lv.energy > 0.0 and lv.region is not cl.Region.ROTATION_MINUS]
    trivial = max(abs(hol.parallel_transport(lv.energy, 1.0, hbar, tol) - 1.0) for lv in levels)
    out.append(Check("holonomy", "trivial holonomy on every level", trivial, 1e-5))
    energies = sorted({lv.energy for lv in spectrum.levels})
    mids = [0.5 * (a + b) for a, b in zip(energies, energies[1:]) if abs(0.5 * (a + b) - 2.0) > 1e-3][:20]
    nearest_one = min(abs(hol.holonomy_phase(e, hbar) - 1.0) for e in mids)
    out.append(Check("holonomy", "mid-gap energies keep |phase - 1| > 0.1 (reported as 0.1 - min)",
                     max(0.0, 0.1 - nearest_one), 1e-300))

    mismatches = 0
    bs_tol = 1e-3
    for e in np.linspace(0.01, 6.0, 600):
        if abs(e - 2.0) < 1e-6:
            continue
        found = hol.is_bohr_sommerfeld(float(e), hbar, bs_tol) is not None
        # |exp(2 pi i x) - 1| = 2 |sin(pi x)| with x the distance of I/hbar to Z.
        ratio = cl.component_action(float(e)) / hbar
        small = abs(ratio - round(ratio)) * hbar < bs_tol
        close = abs(hol.holonomy_phase(float(e), hbar) - 1.0) < 2.0 * math.pi * bs_tol / hbar
        mismatches += found != small or (found and not close)
    out.append(Check("holonomy", "quantization test agrees with holonomy near 1 on a dense grid",
                     float(mismatches), 0.0, exact=True))
    return out


def random_sparse_state(lattice: ops.Lattice, rng: np.random.Generator, size: int,
                        exclude: frozenset[ops.BasisIndex] = frozenset()) -> ops.QuantumState:
    pool = [idx for idx in lattice.indices() if idx not in exclude]
    picks = rng.choice(len(pool), size=min(size, len(pool)), replace=False)
    return ops.QuantumState({pool[int(i)]: complex(rng.normal(), rng.normal()) for i in picks})


def _dirac_residual(spectrum: Spectrum) -> tuple[float, float, float]:
    """Largest deviations (zero sector, own circle, opposite side) from the expected commutators.

    Expected, in units of hbar: [A_s, a_s] = -a_s on zero-sector columns and
    -2 a_s on the s circle. The exception is the column sigma^s_M for odd N,
    where the step lands on sigma^0_N and the action drops by N - 2M = -1.
    Opposite side: [A_{-s}, a_s] vanishes on every rotation column except
    sigma^s_M, where it is N times the lowered state.
    """
    lattice = ops.Lattice.of(spectrum)
    zero = own = cross = 0.0
    for side in (ops.Sector.PLUS, ops.Sector.MINUS):
        lower = ops.lowering(side, spectrum)
        comm = ops.commutator(ops.extended_action(side, spectrum, in_hbar_units=True), lower)
        comm_other = ops.commutator(ops.extended_action(side.opposite, spectrum, in_hbar_units=True), lower)
        for idx in lattice.indices():
            col = lower.column(idx)
            got = comm.column(idx)
            if idx.sector is ops.Sector.ZERO:
                zero = max(zero, _column_gap(got, col, -1))
            elif idx.sector is side:
                factor = (lattice.N - 2 * lattice.M) if idx.q == lattice.M else -2
                own = max(own, _column_gap(got, col, factor))
                other = comm_other.column(idx)
                expected = lattice.N if idx.q == lattice.M else 0
                cross = max(cross, _column_gap(other, col, expected))
            else:
                cross = max(cross, _column_gap(got, {}, 0), _column_gap(comm_other.column(idx), {}, 0))
    return zero, own, cross


def _column_gap(got: dict, col: dict, factor: int) -> float:
    keys = set(got) | set(col)
    return max((abs(got.get(k, 0) - factor * col.get(k, 0)) for k in keys), default=0.0)


def _operators(spectrum: Spectrum, tol: float, rng: np.random.Generator) -> list[Check]:
    out = []
    zero, own, cross = _dirac_residual(spectrum)
    out.append(Check("operators", "[Q_A_s, a_s] = -hbar a_s on the zero sector", zero, 0.0, exact=True))
    out.append(Check("operators", "[Q_A_s, a_s] = -2 hbar a_s on the s circle", own, 0.0, exact=True))
    out.append(Check("operators", "cross-sector commutators", cross, 0.0, exact=True))

    lattice = ops.Lattice.of(spectrum)
    annihilated = 0.0
    for side in (ops.Sector.PLUS, ops.Sector.MINUS):
        lower = ops.lowering(side, spectrum)
        annihilated = max(annihilated, lower(lattice.zero(0)).norm())
        for m in range(spectrum.M, spectrum.m_max + 1):
            annihilated = max(annihilated, lower(ops.BasisIndex(side.opposite, m)).norm())
    out.append(Check("operators", "a_s kills sigma^0_0 and the opposite circle", annihilated, 0.0, exact=True))

    pairing = 0.0
    for side in (ops.Sector.PLUS, ops.Sector.MINUS):
        lower, raise_ = ops.lowering(side, spectrum), ops.raising(side, spectrum)
        edge = frozenset({ops.BasisIndex(side, spectrum.m_max)})
        for _ in range(20):
            psi = random_sparse_state(lattice, rng, 6, edge)
            phi = random_sparse_state(lattice, rng, 6)
            pairing = max(pairing, abs(raise_(psi).inner(phi) - psi.inner(lower(phi))))
    out.append(Check("operators", "<b_s psi, phi> = <psi, a_s phi>", pairing, 1e-14))

    boundary = 0.0
    parity_cases = {spectrum.N % 2: spectrum}
    companion = 0.35 if spectrum.N % 2 == 0 else 0.4
    parity_cases.setdefault(oscillation_bound(companion) % 2, build_spectrum(companion, 12))
    for case in parity_cases.values():
        lat = ops.Lattice.of(case)
        for side in (ops.Sector.PLUS, ops.Sector.MINUS):
            down = ops.lowering(side, case)(ops.BasisIndex(side, lat.M))
            up = ops.raising(side, case)(lat.zero(lat.N))
            boundary = max(boundary, (down - ops.QuantumState.basis(lat.zero(lat.N))).norm(),
                           (up - ops.QuantumState.basis(ops.BasisIndex(side, lat.M))).norm())
    out.append(Check("operators", "separatrix crossing sigma_M <-> sigma^0_N for even and odd N",
                     boundary, 0.0, exact=True))

    small = build_spectrum(spectrum.hbar, max(8, spectrum.M))
    gens = ops.ladder_generators(small)
    failures = 0
    indices = ops.Lattice.of(small).indices()
    for i in indices:
        for j in indices:
            try:
                word = ops.transitivity_witness(i, j, small, gens)
            except Exception:
                failures += 1
                continue
            state = ops.QuantumState.basis(i)
            for name in word:
                state = gens[name](state)
            failures += not (len(state) == 1 and j in state)
    out.append(Check("operators", "transitivity witnesses for all pairs (m_max = 8)", float(failures), 0.0,
                     exact=True))

    swap = ops.swap_operator(spectrum)
    rotation = [idx for idx in lattice.indices() if idx.sector is not ops.Sector.ZERO]
    involution = max((swap(swap(ops.QuantumState.basis(idx))) - ops.QuantumState.basis(idx)).norm()
                     for idx in rotation)
    out.append(Check("operators", "Q_zeta squared is the identity on the rotation sectors", involution, 0.0,
                     exact=True))
    return out


def _on_variety_point(rng: np.random.Generator) -> red.ReducedPoint:
    return red.orbit_map(cl.PhasePoint(float(rng.uniform(-2.0, 2.0)), float(rng.uniform(-math.pi, math.pi))))


_QUADRATIC_POWERS = [pw for pw in np.ndindex(3, 3, 3) if sum(pw) <= 2]


def _random_polynomial(rng: np.random.Generator) -> red.ScalarField:
    """Four random monomials of total degree at most 2.

    The Jacobi check differentiates a bracket numerically with step 1e-6, so
    its roundoff grows like the size of the fields; quadratics keep it below 1e-7.
    """
    coeffs: dict[tuple[int, int, int], float] = {}
    for i in rng.choice(len(_QUADRATIC_POWERS), size=4):
        powers = tuple(int(v) for v in _QUADRATIC_POWERS[int(i)])
        coeffs[powers] = coeffs.get(powers, 0.0) + float(rng.normal())
    return red.polynomial_field(coeffs)


def _bracket_field(F: red.ScalarField, G: red.ScalarField) -> red.ScalarField:
    return red.ScalarField(lambda x: red.bracket(F, G, x))


def _reduction(spectrum: Spectrum, tol: float, rng: np.random.Generator) -> list[Check]:
    out = []
    casimir_drift = tau3_drift = action_drift = 0.0
    for e in (0.6, 1.5, 3.0):
        tau = red.orbit_map(cl.PhasePoint(math.sqrt(2.0 * (e - 2.0 * math.sin(0.15) ** 2)), 0.3))
        end = red.reduced_flow(tau, 10.0 * red.reduced_period(tau[2]), tol)
        casimir_drift = max(casimir_drift, abs(red.casimir(end)))
        tau3_drift = max(tau3_drift, abs(end[2] - tau[2]))
        action_drift = max(action_drift, abs(red.reduced_action(end[2]) - red.reduced_action(tau[2])))
    out.append(Check("reduction", "Casimir drift along reduced flow over ten periods", casimir_drift, 1e-7))
    out.append(Check("reduction", "tau3 conserved along reduced flow", tau3_drift, 1e-7))
    out.append(Check("reduction", "reduced action conserved along reduced flow", action_drift, 1e-7))

    equivariance = 0.0
    for _ in range(8):
        pt = cl.PhasePoint(float(rng.uniform(-2.5, 2.5)), float(rng.uniform(-math.pi, math.pi)))
        if abs(cl.hamiltonian(pt) - 2.0) < 0.05:
            continue
        t = float(rng.uniform(0.1, 3.0))
        lhs = np.array(red.orbit_map(cl.flow(pt, t, tol)))
        rhs = np.array(red.reduced_flow(red.orbit_map(pt), t, tol))
        equivariance = max(equivariance, float(np.max(np.abs(lhs - rhs))))
    out.append(Check("reduction", "orbit_map o flow = reduced_flow o orbit_map", equivariance, 1e-6))

    antisym = leibniz = jacobi = central = 0.0
    for _ in range(100):
        tau = _on_variety_point(rng)
        F, G, H = (_random_polynomial(rng) for _ in range(3))
        antisym = max(antisym, abs(red.bracket(F, G, tau) + red.bracket(G, F, tau)))
        leibniz = max(leibniz, abs(red.bracket(F, G * H, tau)
                                   - G(tau) * red.bracket(F, H, tau) - red.bracket(F, G, tau) * H(tau)))
        cyclic = (red.bracket(F, _bracket_field(G, H), tau) + red.bracket(G, _bracket_field(H, F), tau)
                  + red.bracket(H, _bracket_field(F, G), tau))
        jacobi = max(jacobi, abs(cyclic))
        central = max(central, abs(red.bracket(red.CASIMIR_FIELD, F, tau)))
    out.append(Check("reduction", "bracket antisymmetry", antisym, 0.0, exact=True))
    out.append(Check("reduction", "Leibniz rule", leibniz, 1e-8))
    out.append(Check("reduction", "Jacobi identity (finite-difference gradients)", jacobi, 1e-6))
    out.append(Check("reduction", "Casimir is central", central, 1e-8))

    factor = 0.0
    for e in np.concatenate([np.linspace(0.05, 1.95, 20), np.linspace(2.05, 8.0, 20)]):
        e = float(e)
        expected = cl.component_action(e) / 2.0 if e < 2.0 else cl.component_action(e)
        factor = max(factor, abs(red.reduced_action(e) - expected))
    out.append(Check("reduction", "reduced action = I0/2 below 2 and I+- above 2", factor, 1e-10))

    loop = max(abs(red.reduced_loop_integral(e) - 2.0 * math.pi * red.reduced_action(e)) for e in (0.5, 1.5, 3.0))
    out.append(Check("reduction", "loop integral of the reduced one-form = 2 pi reduced action", loop, 1e-7))

    overlap = 0.0
    for _ in range(50):
        tau = _on_variety_point(rng)
        if abs(1.0 - tau[0] ** 2) < 1e-3 or abs(tau[0] * (tau[2] + tau[0] - 1.0)) < 1e-3:
            continue
        tangent = np.cross(red.casimir_gradient(tau), rng.normal(size=3))
        overlap = max(overlap, abs(red.reduced_one_form(tau, tangent, red.Chart.U1)
                                   - red.reduced_one_form(tau, tangent, red.Chart.U2)))
    out.append(Check("reduction", "chart expressions agree on the overlap", overlap, 1e-9))

    levels = red.reduced_spectrum(spectrum.hbar, spectrum.m_max)
    even = red.reconstruct_even(levels, spectrum)
    gap = max(abs(a.energy - b.energy) for a, b in zip(levels, even))
    out.append(Check("reduction", "even reconstruction matches unreduced energies", gap, 1e-8))
    return out


#: Generic samples keep rho1 = p^2/2 at least this large. Closer to the boundary
#: the smallest singular value of the stratification matrix drops under the rank
#: threshold and the psi/pi round trip loses digits like eps / rho1.
_GENERIC_RHO1_MIN = 1e-3


def _variety_sample(rng: np.random.Generator, i: int) -> odd.InvariantTuple:
    """Image of a random (z, p, alpha); every tenth-class slot lands on a singular stratum."""
    x, y, p = (float(v) for v in rng.normal(size=3))
    while 0.5 * p * p < _GENERIC_RHO1_MIN:
        p = float(rng.normal())
    alpha = float(rng.uniform(-math.pi, math.pi))
    kind = i % 10
    if kind == 6:
        x = y = 0.0
    elif kind == 7:
        p = 0.0
    elif kind == 8:
        p, alpha = 0.0, 0.0
    elif kind == 9:
        p, alpha = 0.0, math.pi
    return odd.invariants8((x, y), cl.PhasePoint(p, alpha))


def _minus_one(spectrum: Spectrum, tol: float, rng: np.random.Generator) -> list[Check]:
    out = []
    samples = [_variety_sample(rng, i) for i in range(1000)]
    relations = max(float(np.max(np.abs(odd.relations_residual(t)))) for t in samples)
    out.append(Check("minusone", "relations f1..f5 vanish on 1000 images", relations, 1e-12))
    mismatched = sum((odd.jacobian_rank(t).kind is odd.Stratum.REGULAR) != odd.in_regular_set(t) for t in samples)
    out.append(Check("minusone", "rank 5 exactly on the regular set (1000 samples)", float(mismatched), 0.0,
                     exact=True))

    roundtrip = 0.0
    for t in samples:
        if t.rho1 > 0.0 and (t.sigma[3] != 0.0 or t.sigma[4] != 0.0):
            scale = max(1.0, float(np.max(np.abs(t.as_array()))))
            back = odd.psi(odd.pi_inverse(t))
            roundtrip = max(roundtrip, float(np.max(np.abs(back.as_array() - t.as_array()))) / scale)
            b = odd.pi_inverse(t)
            again = odd.pi_inverse(odd.psi(b))
            drift = np.abs(np.array(again.tau + again.nu) - np.array(b.tau + b.nu))
            roundtrip = max(roundtrip, float(np.max(drift)) / scale)
    out.append(Check("minusone", "Psi / Pi round trips (relative to tuple size)", roundtrip, 1e-12))

    hbar = spectrum.hbar
    below = {lv.n: lv.energy for lv in spectrum.oscillation_levels()}
    even = red.reconstruct_even(red.reduced_spectrum(hbar, spectrum.m_max), spectrum)
    odd_levels = odd.reconstruct_odd(odd.odd_reduced_spectrum(hbar, spectrum.m_max), spectrum)
    recovered: dict[int, float] = {}
    duplicates = 0
    for lv in even + odd_levels:
        if lv.energy < 2.0:
            duplicates += lv.n in recovered
            recovered[lv.n] = lv.energy
    parity_ok = all(n % 2 == 0 for n in (lv.n for lv in even if lv.energy < 2.0)) and all(
        n % 2 == 1 for n in (lv.n for lv in odd_levels if lv.energy < 2.0))
    missing = set(below) ^ set(recovered)
    gap = max((abs(recovered[n] - below[n]) for n in set(below) & set(recovered)), default=0.0)
    penalty = float(len(missing) + duplicates + (not parity_ok))
    out.append(Check("minusone", "even and odd reconstructions partition the oscillation levels",
                     penalty, 0.0, exact=True))
    out.append(Check("minusone", "reconstructed energies match the spectrum", gap, 1e-8))

    wrong = sum(odd.orbit_pair_count(e, hbar) != (n + 1) // 2 for n, e in below.items())
    out.append(Check("minusone", "orbit pair count = floor((n + 1) / 2)", float(wrong), 0.0, exact=True))

    points = [(float(rng.normal()), float(rng.uniform(-math.pi, math.pi))) for _ in range(50)]
    sections: list[Callable[[float, float], complex]] = [
        lambda p, a: p,
        lambda p, a: math.sin(a) + 0j,
        lambda p, a: p * math.cos(a) * (1 + 0.5j),
    ]
    not_even = sum(not odd.is_star_even(s, points) for s in sections)
    out.append(Check("minusone", "odd coefficient functions give star-even sections", float(not_even), 0.0,
                     exact=True))
    return out


SUITES: dict[str, Callable[[Spectrum, float, np.random.Generator], list[Check]]] = {
    "classical": _classical,
    "holonomy": _holonomy,
    "operators": _operators,
    "reduction": _reduction,
    "minusone": _minus_one,
}


def run_suites(names: list[str], spectrum: Spectrum, tol: float, seed: int) -> list[Check]:
    """Run the named suites in order; each suite gets its own generator derived from ``seed``."""
    out: list[Check] = []
    for offset, name in enumerate(SUITES):
        if name in names:
            rng = np.random.default_rng([seed, offset])
            out.extend(SUITES[name](spectrum, tol, rng))
    return out

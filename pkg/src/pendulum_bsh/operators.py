"""Operators on the Bohr-Sommerfeld basis.

The basis has three sectors:

* ``ZERO``: sigma^0_n for n = 0..N, supported on the oscillation tori;
* ``PLUS`` and ``MINUS``: sigma^+-_m for m = M..m_max, supported on the two
  rotation circles (truncated at m_max so the carrier is finite).

The basis is orthonormal. Operators are stored column by column as sparse
maps. The ladder operators are the quantizations of R e^{-+i Theta}: each
column is weighted by the envelope R = rho * r at the source level, and the
index moves by one step. Below the separatrix a step changes the action by
hbar and on a rotation circle by 2 hbar. The step from sigma_M down to
sigma^0_N crosses the separatrix.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .classical import SEPARATRIX_ENERGY, Region
from .errors import ConstructionError, DomainError, SearchExhaustedError
from .spectrum import Spectrum

__all__ = [
    "Sector",
    "BasisIndex",
    "Lattice",
    "QuantumState",
    "LinearOperator",
    "SmoothingEnvelope",
    "smooth_step",
    "diagonal_operator",
    "identity",
    "action_values",
    "extended_action_quanta",
    "extended_action",
    "lowering",
    "raising",
    "swap_operator",
    "commutator",
    "adjoint",
    "ladder_generators",
    "transitivity_witness",
    "GENERATOR_NAMES",
]


class Sector(enum.Enum):
    ZERO = "zero"
    PLUS = "plus"
    MINUS = "minus"

    @property
    def opposite(self) -> Sector:
        if self is Sector.PLUS:
            return Sector.MINUS
        if self is Sector.MINUS:
            return Sector.PLUS
        raise DomainError("the zero sector has no opposite side")


class BasisIndex(NamedTuple):
    sector: Sector
    q: int

    def __str__(self) -> str:
        mark = {Sector.ZERO: "0", Sector.PLUS: "+", Sector.MINUS: "-"}[self.sector]
        return f"sigma[{mark}]{self.q}"


@dataclass(frozen=True)
class Lattice:
    """Index bounds of the truncated basis; ``index`` refuses out-of-range labels."""

    N: int
    M: int
    m_max: int

    @classmethod
    def of(cls, spectrum: Spectrum) -> Lattice:
        return cls(spectrum.N, spectrum.M, spectrum.m_max)

    def contains(self, idx: BasisIndex) -> bool:
        if idx.sector is Sector.ZERO:
            return 0 <= idx.q <= self.N
        return self.M <= idx.q <= self.m_max

    def index(self, sector: Sector, q: int) -> BasisIndex:
        idx = BasisIndex(sector, int(q))
        if not self.contains(idx):
            raise DomainError(f"{idx} is outside the lattice (N={self.N}, M={self.M}, m_max={self.m_max})")
        return idx

    def zero(self, n: int) -> BasisIndex:
        return self.index(Sector.ZERO, n)

    def plus(self, m: int) -> BasisIndex:
        return self.index(Sector.PLUS, m)

    def minus(self, m: int) -> BasisIndex:
        return self.index(Sector.MINUS, m)

    def indices(self) -> tuple[BasisIndex, ...]:
        """All basis labels in a fixed order: zero sector, then plus, then minus."""
        out = [BasisIndex(Sector.ZERO, n) for n in range(self.N + 1)]
        for sector in (Sector.PLUS, Sector.MINUS):
            out.extend(BasisIndex(sector, m) for m in range(self.M, self.m_max + 1))
        return tuple(out)

    def position(self, idx: BasisIndex) -> int:
        if not self.contains(idx):
            raise DomainError(f"{idx} is outside the lattice")
        if idx.sector is Sector.ZERO:
            return idx.q
        width = self.m_max - self.M + 1
        offset = self.N + 1 + (0 if idx.sector is Sector.PLUS else width)
        return offset + idx.q - self.M

    def __len__(self) -> int:
        return self.N + 1 + 2 * (self.m_max - self.M + 1)


def _prune(coeffs: Mapping[BasisIndex, complex]) -> dict[BasisIndex, complex]:
    return {k: v for k, v in coeffs.items() if v != 0}


class QuantumState:
    """A finite combination of basis vectors; immutable."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[BasisIndex, complex] | None = None) -> None:
        self._coeffs = _prune(coeffs or {})

    @classmethod
    def basis(cls, idx: BasisIndex) -> QuantumState:
        return cls({idx: 1})

    @property
    def coefficients(self) -> dict[BasisIndex, complex]:
        return dict(self._coeffs)

    def __getitem__(self, idx: BasisIndex) -> complex:
        return self._coeffs.get(idx, 0)

    def __iter__(self) -> Iterator[BasisIndex]:
        return iter(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def inner(self, other: QuantumState) -> complex:
        """Hermitian product, conjugate-linear in ``self``."""
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        total = 0j
        for idx in small:
            if idx in large._coeffs:
                total += complex(self[idx]).conjugate() * other[idx]
        return total

    def norm(self) -> float:
        return math.sqrt(self.inner(self).real)

    def __add__(self, other: QuantumState) -> QuantumState:
        out = dict(self._coeffs)
        for idx, value in other._coeffs.items():
            out[idx] = out.get(idx, 0) + value
        return QuantumState(out)

    def __sub__(self, other: QuantumState) -> QuantumState:
        return self + (-1) * other

    def __rmul__(self, scalar: complex) -> QuantumState:
        return QuantumState({k: scalar * v for k, v in self._coeffs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantumState):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v!r}" for k, v in sorted(self._coeffs.items(), key=_order_key))
        return f"QuantumState({{{body}}})"


def _order_key(item: tuple[BasisIndex, object]) -> tuple[int, int]:
    idx = item[0]
    return (["zero", "plus", "minus"].index(idx.sector.value), idx.q)


@dataclass(frozen=True)
class LinearOperator:
    """Sparse operator stored by columns: ``columns[source] = {target: coefficient}``.

    ``leaks`` lists the columns whose true image leaves the truncated carrier
    and has been dropped (raising past m_max).
    """

    columns: Mapping[BasisIndex, Mapping[BasisIndex, complex]]
    leaks: frozenset[BasisIndex] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        cleaned = {}
        for src, col in self.columns.items():
            col = _prune(col)
            if col:
                cleaned[src] = col
        object.__setattr__(self, "columns", cleaned)
        object.__setattr__(self, "leaks", frozenset(self.leaks))

    def column(self, idx: BasisIndex) -> dict[BasisIndex, complex]:
        return dict(self.columns.get(idx, {}))

    def entries(self) -> Iterator[tuple[BasisIndex, BasisIndex, complex]]:
        """Yield (row, column, value) for every stored nonzero entry."""
        for src, col in self.columns.items():
            for dst, value in col.items():
                yield dst, src, value

    def apply(self, state: QuantumState) -> QuantumState:
        out: dict[BasisIndex, complex] = {}
        for src in state:
            coeff = state[src]
            for dst, value in self.columns.get(src, {}).items():
                out[dst] = out.get(dst, 0) + value * coeff
        return QuantumState(out)

    def apply_checked(self, state: QuantumState) -> tuple[QuantumState, bool]:
        """Apply and report whether any part of the image was lost to truncation."""
        return self.apply(state), any(idx in self.leaks for idx in state)

    def __call__(self, state: QuantumState | BasisIndex) -> QuantumState:
        if isinstance(state, BasisIndex):
            state = QuantumState.basis(state)
        return self.apply(state)

    def __matmul__(self, other: LinearOperator) -> LinearOperator:
        """Composition: (self @ other) applies ``other`` first."""
        cols: dict[BasisIndex, dict[BasisIndex, complex]] = {}
        for src, col in other.columns.items():
            acc: dict[BasisIndex, complex] = {}
            for mid, a in col.items():
                for dst, b in self.columns.get(mid, {}).items():
                    acc[dst] = acc.get(dst, 0) + b * a
            cols[src] = acc
        leaks = set(other.leaks)
        leaks.update(src for src, col in other.columns.items() if any(m in self.leaks for m in col))
        return LinearOperator(cols, frozenset(leaks))

    def _combine(self, other: LinearOperator, sign: int) -> LinearOperator:
        cols = {src: dict(col) for src, col in self.columns.items()}
        for src, col in other.columns.items():
            target = cols.setdefault(src, {})
            for dst, value in col.items():
                target[dst] = target.get(dst, 0) + sign * value
        return LinearOperator(cols, self.leaks | other.leaks)

    def __add__(self, other: LinearOperator) -> LinearOperator:
        return self._combine(other, 1)

    def __sub__(self, other: LinearOperator) -> LinearOperator:
        return self._combine(other, -1)

    def __rmul__(self, scalar: complex) -> LinearOperator:
        cols = {src: {dst: scalar * v for dst, v in col.items()} for src, col in self.columns.items()}
        return LinearOperator(cols, self.leaks)

    def __neg__(self) -> LinearOperator:
        return (-1) * self

    def adjoint(self) -> LinearOperator:
        cols: dict[BasisIndex, dict[BasisIndex, complex]] = {}
        for dst, src, value in self.entries():
            cols.setdefault(dst, {})[src] = complex(value).conjugate() if isinstance(value, complex) else value
        return LinearOperator(cols)

    def is_zero(self) -> bool:
        return not self.columns

    def restrict(self, sources: Iterable[BasisIndex]) -> LinearOperator:
        """Keep only the listed columns."""
        keep = set(sources)
        return LinearOperator({s: c for s, c in self.columns.items() if s in keep},
                              frozenset(s for s in self.leaks if s in keep))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return self.columns == other.columns

    def to_triplets(self, lattice: Lattice) -> list[tuple[int, int, float, float]]:
        """Sorted (row, column, re, im) list using the lattice's basis ordering."""
        rows = []
        for dst, src, value in self.entries():
            value = complex(value)
            rows.append((lattice.position(dst), lattice.position(src), value.real, value.imag))
        return sorted(rows)


def smooth_step(x: float) -> float:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, all derivatives vanish at both ends."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0

    def bump(s: float) -> float:
        return math.exp(-1.0 / s) if s > 0.0 else 0.0

    a, b = bump(x), bump(1.0 - x)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothingEnvelope:
    """Cut-off functions that make e^{-+i Theta} globally smooth.

    ``r`` vanishes to infinite order at e = 0 and equals 1 from the first
    positive level energy on. ``rho(side, e, p_sign)`` equals 1 on the
    oscillation region up to 2 - epsilon and on the ``side`` rotation circle
    from 2 + epsilon on. It vanishes on the separatrix and on the other circle.
    Here epsilon is the spectrum's separatrix gap, so the band where rho
    changes holds no level.
    """

    epsilon: float
    r_scale: float

    @classmethod
    def for_spectrum(cls, spectrum: Spectrum) -> SmoothingEnvelope:
        positive = [lv.energy for lv in spectrum.levels if lv.energy > 0.0]
        return cls(spectrum.epsilon_gap, min(positive))

    def r(self, e: float) -> float:
        return smooth_step(e / self.r_scale)

    def rho(self, side: Sector, e: float, p_sign: int = 1) -> float:
        if side is Sector.ZERO:
            raise DomainError("rho is indexed by a rotation side")
        gap = e - SEPARATRIX_ENERGY
        if gap < 0.0:
            return smooth_step(-gap / self.epsilon)
        if gap == 0.0:
            return 0.0
        on_side = (p_sign > 0) == (side is Sector.PLUS)
        return smooth_step(gap / self.epsilon) if on_side else 0.0

    def R(self, side: Sector, e: float, p_sign: int = 1) -> float:
        return self.rho(side, e, p_sign) * self.r(e)

    def at_level(self, side: Sector, idx: BasisIndex, spectrum: Spectrum) -> float:
        """R_side evaluated on the level that carries ``idx``."""
        e = _energy(idx, spectrum)
        return self.R(side, e, -1 if idx.sector is Sector.MINUS else 1)


def _energy(idx: BasisIndex, spectrum: Spectrum) -> float:
    if idx.sector is Sector.ZERO:
        return spectrum.level(Region.OSCILLATION, idx.q).energy
    region = Region.ROTATION_PLUS if idx.sector is Sector.PLUS else Region.ROTATION_MINUS
    return spectrum.level(region, idx.q).energy


def diagonal_operator(values: Mapping[BasisIndex, complex], lattice: Lattice) -> LinearOperator:
    """Q_f with Q_f sigma_C = values[C] sigma_C; every lattice index needs a value."""
    missing = [idx for idx in lattice.indices() if idx not in values]
    if missing:
        raise ConstructionError(f"no value supplied for {len(missing)} basis indices, first {missing[0]}")
    return LinearOperator({idx: {idx: values[idx]} for idx in lattice.indices()})


def identity(lattice: Lattice) -> LinearOperator:
    return diagonal_operator({idx: 1 for idx in lattice.indices()}, lattice)


def action_values(spectrum: Spectrum) -> dict[BasisIndex, float]:
    """Eigenvalues of the quantized component action: n hbar on sigma^0_n, m hbar on sigma^+-_m."""
    return {idx: idx.q * spectrum.hbar for idx in Lattice.of(spectrum).indices()}


def extended_action_quanta(side: Sector, spectrum: Spectrum,
                           envelope: SmoothingEnvelope | None = None) -> dict[BasisIndex, int]:
    """Eigenvalues of Q_{A_side} in units of hbar.

    A_side = rho_side * I with I the action of the whole level set: n on
    sigma^0_n, 2m on the ``side`` circle and 0 on the other circle. The envelope
    values at levels are exactly 0 or 1, so the result is integral.
    """
    envelope = envelope or SmoothingEnvelope.for_spectrum(spectrum)
    out: dict[BasisIndex, int] = {}
    for idx in Lattice.of(spectrum).indices():
        weight = envelope.rho(side, _energy(idx, spectrum), -1 if idx.sector is Sector.MINUS else 1)
        if weight not in (0.0, 1.0):
            raise ConstructionError(f"envelope is {weight!r} on level {idx}; it must be 0 or 1 there")
        full = idx.q if idx.sector is Sector.ZERO else 2 * idx.q
        out[idx] = int(weight) * full
    return out


def extended_action(side: Sector, spectrum: Spectrum, envelope: SmoothingEnvelope | None = None,
                    *, in_hbar_units: bool = False) -> LinearOperator:
    """Diagonal operator Q_{A_side}; with ``in_hbar_units`` the entries are the integers A/hbar."""
    quanta = extended_action_quanta(side, spectrum, envelope)
    scale = 1 if in_hbar_units else spectrum.hbar
    return diagonal_operator({idx: scale * v for idx, v in quanta.items()}, Lattice.of(spectrum))


def _lower_target(idx: BasisIndex, side: Sector, lattice: Lattice) -> BasisIndex | None:
    if idx.sector is Sector.ZERO:
        return BasisIndex(Sector.ZERO, idx.q - 1) if idx.q >= 1 else None
    if idx.sector is not side:
        return None
    if idx.q > lattice.M:
        return BasisIndex(side, idx.q - 1)
    # sigma_M drops across the separatrix onto the top oscillation state. The
    # same target serves both parities of N: for odd N, 2M = N + 1.
    return BasisIndex(Sector.ZERO, lattice.N)


def lowering(side: Sector, spectrum: Spectrum, envelope: SmoothingEnvelope | None = None) -> LinearOperator:
    """Q_{R_side e^{-i Theta_side}}: moves each state one level down on its track.

    The column weight is R_side at the source level. It vanishes on sigma^0_0,
    because r(0) = 0, and on the opposite circle, because rho_side = 0 there.
    """
    if side is Sector.ZERO:
        raise DomainError("ladder operators are indexed by a rotation side")
    envelope = envelope or SmoothingEnvelope.for_spectrum(spectrum)
    lattice = Lattice.of(spectrum)
    cols: dict[BasisIndex, dict[BasisIndex, complex]] = {}
    for idx in lattice.indices():
        weight = envelope.at_level(side, idx, spectrum)
        target = _lower_target(idx, side, lattice)
        if weight != 0.0 and target is not None:
            cols[idx] = {target: weight}
    return LinearOperator(cols)


def raising(side: Sector, spectrum: Spectrum, envelope: SmoothingEnvelope | None = None) -> LinearOperator:
    """Adjoint of ``lowering(side)``.

    The top state sigma_{m_max} on the ``side`` circle would be raised out of
    the carrier. Its column is empty and it is recorded in ``leaks``.
    """
    up = lowering(side, spectrum, envelope).adjoint()
    return LinearOperator(up.columns, frozenset({BasisIndex(side, spectrum.m_max)}))


def swap_operator(spectrum: Spectrum) -> LinearOperator:
    """Q_zeta: zero on the oscillation sector, exchanges sigma^+_m and sigma^-_m."""
    lattice = Lattice.of(spectrum)
    cols = {}
    for idx in lattice.indices():
        if idx.sector is not Sector.ZERO:
            cols[idx] = {BasisIndex(idx.sector.opposite, idx.q): 1}
    return LinearOperator(cols)


def commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return a @ b - b @ a


def adjoint(a: LinearOperator) -> LinearOperator:
    return a.adjoint()


GENERATOR_NAMES = ("a+", "a-", "b+", "b-", "Q_zeta")


def ladder_generators(spectrum: Spectrum, envelope: SmoothingEnvelope | None = None) -> dict[str, LinearOperator]:
    """The five generators: lowering a+-, raising b+-, and the swap Q_zeta."""
    envelope = envelope or SmoothingEnvelope.for_spectrum(spectrum)
    return {
        "a+": lowering(Sector.PLUS, spectrum, envelope),
        "a-": lowering(Sector.MINUS, spectrum, envelope),
        "b+": raising(Sector.PLUS, spectrum, envelope),
        "b-": raising(Sector.MINUS, spectrum, envelope),
        "Q_zeta": swap_operator(spectrum),
    }


def transitivity_witness(
    i: BasisIndex,
    j: BasisIndex,
    spectrum: Spectrum,
    generators: Mapping[str, LinearOperator] | None = None,
) -> list[str]:
    """Shortest word in the generators sending sigma_i to a nonzero multiple of sigma_j.

    Words are listed in application order, so ["b+", "b+"] means apply b+ twice.
    Every generator sends a basis vector to a multiple of a single basis
    vector (or to zero), so a breadth-first search over basis labels suffices.
    """
    lattice = Lattice.of(spectrum)
    for idx in (i, j):
        if not lattice.contains(idx):
            raise DomainError(f"{idx} is outside the truncated lattice")
    gens = generators or ladder_generators(spectrum)
    step: dict[str, dict[BasisIndex, BasisIndex]] = {}
    for name in GENERATOR_NAMES:
        step[name] = {src: next(iter(col)) for src, col in gens[name].columns.items() if len(col) == 1}

    parent: dict[BasisIndex, tuple[BasisIndex, str] | None] = {i: None}
    queue = deque([i])
    while queue:
        node = queue.popleft()
        if node == j:
            word: list[str] = []
            while parent[node] is not None:
                node, name = parent[node]  # type: ignore[misc]
                word.append(name)
            return word[::-1]
        for name in GENERATOR_NAMES:
            nxt = step[name].get(node)
            if nxt is not None and nxt not in parent:
                parent[nxt] = (node, name)
                queue.append(nxt)
    raise SearchExhaustedError(f"no generator word connects {i} to {j} inside the truncation")

"""Fock-basis bookkeeping for fixed-photon-number multimode states.

Modes are indexed from 0. A state lives in a single sector (fixed number of
modes and total photon number); the sector basis is ordered
reverse-lexicographically, so for two modes and two photons the order is
(2, 0), (1, 1), (0, 2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

DEFAULT_TOL = 1e-10


class OccupationVector(tuple):
    """Photon counts per mode. Hashable and immutable, compares like a tuple."""

    def __new__(cls, counts: Iterable[int]) -> "OccupationVector":
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative photon count in {counts}")
        return super().__new__(cls, counts)

    @property
    def n_modes(self) -> int:
        return len(self)

    def total(self) -> int:
        return sum(self)

    def __repr__(self) -> str:
        return f"|{''.join(str(c) for c in self)}>" if all(c < 10 for c in self) else f"|{','.join(map(str, self))}>"


def _generate(n_modes: int, total: int) -> Iterator[tuple[int, ...]]:
    if n_modes == 0:
        if total == 0:
            yield ()
        return
    if n_modes == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _generate(n_modes - 1, total - first):
            yield (first,) + rest


@dataclass(frozen=True)
class SectorBasis:
    """All occupations of ``n_modes`` modes holding exactly ``total_photons``."""

    n_modes: int
    total_photons: int
    occupations: tuple[OccupationVector, ...] = field(repr=False, compare=False)
    _index: Mapping[tuple[int, ...], int] = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.occupations)

    def __len__(self) -> int:
        return len(self.occupations)

    def __iter__(self) -> Iterator[OccupationVector]:
        return iter(self.occupations)

    def index_of(self, occupation: Sequence[int]) -> int:
        try:
            return self._index[tuple(occupation)]
        except KeyError:
            raise KeyError(f"{tuple(occupation)} is not in sector "
                           f"(n_modes={self.n_modes}, total={self.total_photons})") from None

    def occupation_at(self, index: int) -> OccupationVector:
        return self.occupations[index]

    def __contains__(self, occupation) -> bool:
        return tuple(occupation) in self._index


@lru_cache(maxsize=None)
def enumerate_basis(n_modes: int, total_photons: int) -> SectorBasis:
    """Return the canonical basis of the sector.

    The size is the stars-and-bars count ``C(n_modes + total - 1, total)``.
    A zero-mode sector is allowed; it holds only the empty vacuum.
    """
    if n_modes < 0 or total_photons < 0:
        raise ValueError("n_modes and total_photons must be non-negative")
    occs = tuple(OccupationVector(o) for o in _generate(n_modes, total_photons))
    basis = SectorBasis(n_modes, total_photons, occs, {tuple(o): i for i, o in enumerate(occs)})
    if n_modes > 0:
        assert basis.size == comb(n_modes + total_photons - 1, total_photons)
    return basis


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense amplitudes over one :class:`SectorBasis`."""

    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    @property
    def total_photons(self) -> int:
        return self.basis.total_photons

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / nrm)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.basis.index_of(occupation)])

    def items(self, cutoff: float = 0.0) -> Iterator[tuple[OccupationVector, complex]]:
        """Yield (occupation, amplitude) pairs with modulus above ``cutoff``."""
        for occ, amp in zip(self.basis.occupations, self.amplitudes):
            if abs(amp) > cutoff:
                yield occ, complex(amp)

    def __repr__(self) -> str:
        terms = [f"({a.real:.6g}{a.imag:+.6g}j){o!r}" for o, a in self.items(1e-12)]
        return "StateVector(" + (" + ".join(terms) or "0") + ")"

    @classmethod
    def from_dict(cls, terms: Mapping[Sequence[int], complex], normalize: bool = False) -> "StateVector":
        """Build a state from ``{occupation: amplitude}``; all occupations share one sector."""
        if not terms:
            raise ValueError("at least one occupation is needed to fix the sector")
        occs = [tuple(o) for o in terms]
        n_modes, total = len(occs[0]), sum(occs[0])
        if any(len(o) != n_modes or sum(o) != total for o in occs):
            raise ValueError("all occupations must share mode count and photon number")
        basis = enumerate_basis(n_modes, total)
        amps = np.zeros(basis.size, dtype=complex)
        for occ, amp in terms.items():
            amps[basis.index_of(occ)] += amp
        state = cls(basis, amps)
        return state.normalized() if normalize else state

    def to_json_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "total_photons": self.total_photons,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "StateVector":
        for key in ("n_modes", "total_photons", "amplitudes"):
            if key not in data:
                raise ValueError(f"state JSON is missing field '{key}'")
        basis = enumerate_basis(int(data["n_modes"]), int(data["total_photons"]))
        try:
            amps = [complex(re, im) for re, im in data["amplitudes"]]
        except (TypeError, ValueError):
            raise ValueError("state JSON field 'amplitudes' must be a list of [re, im] pairs") from None
        if len(amps) != basis.size:
            raise ValueError(f"state JSON field 'amplitudes' has {len(amps)} entries, "
                             f"sector needs {basis.size}")
        return cls(basis, amps)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        return cls.from_json_dict(json.loads(text))


def basis_state(occupation: Sequence[int]) -> StateVector:
    """The computational basis state with the given occupation."""
    occupation = OccupationVector(occupation)
    basis = enumerate_basis(len(occupation), occupation.total())
    amps = np.zeros(basis.size, dtype=complex)
    amps[basis.index_of(occupation)] = 1.0
    return StateVector(basis, amps)


def single_photon_state(n_modes: int, occupied_modes: Iterable[int]) -> StateVector:
    """One photon in each listed mode, vacuum elsewhere."""
    modes = list(occupied_modes)
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate mode index in {modes}: single photons only")
    if any(m < 0 or m >= n_modes for m in modes):
        raise ValueError(f"mode index out of range for {n_modes} modes: {modes}")
    occ = [0] * n_modes
    for m in modes:
        occ[m] = 1
    return basis_state(occ)


def _check_same_basis(x: StateVector, y: StateVector) -> None:
    if x.basis != y.basis:
        raise ValueError(f"basis mismatch: {x.basis} vs {y.basis}")


def inner_product(x: StateVector, y: StateVector) -> complex:
    """<x|y>, conjugate-linear in ``x``."""
    _check_same_basis(x, y)
    return complex(np.vdot(x.amplitudes, y.amplitudes))


def fidelity_up_to_phase(x: StateVector, y: StateVector) -> float:
    """|<x|y>|^2 for normalized states; 1 exactly when they agree up to a global phase."""
    _check_same_basis(x, y)
    return float(min(1.0, abs(np.vdot(x.amplitudes, y.amplitudes)) ** 2))


@dataclass(frozen=True, eq=False)
class LogicalMode:
    """A normalized superposition of physical modes.

    The logical creation operator is ``sum_j coeffs[j] * a_j^dagger``.
    """

    coeffs: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if abs(np.linalg.norm(c) - 1.0) > self.tol:
            raise ValueError(f"logical mode coefficients must have unit norm, got {np.linalg.norm(c)}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @classmethod
    def physical(cls, mode: int, n_modes: int) -> "LogicalMode":
        if not 0 <= mode < n_modes:
            raise ValueError(f"mode {mode} out of range for {n_modes} modes")
        c = np.zeros(n_modes, dtype=complex)
        c[mode] = 1.0
        return cls(c)

"""Target gates and postselected linear-optical circuits that implement them.

A :class:`PostselectedCircuit` puts the signal modes first and the ancilla
(helper) modes after them. Checking a circuit against a :class:`GateSpec`
builds the heralded map ``M`` (ancilla prepared, unitary applied, ancillas
projected on the pattern) and fits it to ``lam * T`` for the target
diagonal ``T``; the success probability is ``|lam|**2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from math import factorial, sqrt
from typing import Mapping, Sequence

import numpy as np

from .fock import OccupationVector, StateVector, enumerate_basis
from .optics import ModeUnitary, apply_mode_unitary, embed, permanent
from .postselect import PostselectionOutcome, PostselectionPattern, postselect

DEFAULT_GATE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GateSpec:
    """Diagonal target gate on ``n_signal_modes`` modes over a list of basis occupations."""

    name: str
    n_signal_modes: int
    computational_basis: tuple[OccupationVector, ...]
    target_diagonal: np.ndarray

    def __post_init__(self):
        basis = tuple(OccupationVector(b) for b in self.computational_basis)
        diag = np.array(self.target_diagonal, dtype=complex)
        if diag.shape != (len(basis),):
            raise ValueError("one target phase per computational basis state is required")
        if any(len(b) != self.n_signal_modes for b in basis):
            raise ValueError("basis occupations must cover exactly the signal modes")
        if len(set(basis)) != len(basis):
            raise ValueError("computational basis has repeated occupations")
        if not np.allclose(np.abs(diag), 1.0, atol=1e-12):
            raise ValueError("target diagonal entries must have unit modulus")
        diag.setflags(write=False)
        object.__setattr__(self, "computational_basis", basis)
        object.__setattr__(self, "target_diagonal", diag)

    @property
    def target_matrix(self) -> np.ndarray:
        return np.diag(self.target_diagonal)

    def apply(self, amplitudes: Sequence[complex]) -> np.ndarray:
        """Act on amplitudes listed in computational-basis order."""
        return self.target_diagonal * np.asarray(amplitudes, dtype=complex)

    @cached_property
    def output_basis(self) -> tuple[OccupationVector, ...]:
        """Every signal occupation reachable from the computational basis by a number-preserving map."""
        totals = sorted({b.total() for b in self.computational_basis})
        return tuple(o for t in totals for o in enumerate_basis(self.n_signal_modes, t))

    @cached_property
    def embedded_target(self) -> np.ndarray:
        rows = {o: i for i, o in enumerate(self.output_basis)}
        t = np.zeros((len(self.output_basis), len(self.computational_basis)), dtype=complex)
        for j, b in enumerate(self.computational_basis):
            t[rows[b], j] = self.target_diagonal[j]
        return t


def ns_spec() -> GateSpec:
    """Nonlinear sign shift: flips the sign of the two-photon amplitude of one mode."""
    return GateSpec("NS", 1, ((0,), (1,), (2,)), (1, 1, -1))


def cs_spec() -> GateSpec:
    """Conditional sign shift: flips the sign of |11> on two modes."""
    return GateSpec("CS", 2, ((0, 0), (1, 0), (0, 1), (1, 1)), (1, 1, 1, -1))


def cs_protocol_spec() -> GateSpec:
    """CS extended to leave |20> untouched.

    The three-mode bound protocol feeds a |20> component on the gate's modes
    through CS and needs it unchanged; plain CS leaves that input undefined.
    """
    return GateSpec("CS", 2, ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0)), (1, 1, 1, -1, 1))


GATE_SPECS = {"NS": ns_spec, "CS": cs_spec}


def gate_spec(name: str) -> GateSpec:
    try:
        return GATE_SPECS[name.upper()]()
    except KeyError:
        raise ValueError(f"unknown gate {name!r}; choose from {sorted(GATE_SPECS)}") from None


@dataclass(frozen=True, eq=False)
class PostselectedCircuit:
    n_signal_modes: int
    n_ancilla_modes: int
    ancilla_preparation: tuple[int, ...]
    unitary: ModeUnitary
    pattern: PostselectionPattern

    def __post_init__(self):
        prep = tuple(int(x) for x in self.ancilla_preparation)
        object.__setattr__(self, "ancilla_preparation", prep)
        if len(prep) != self.n_ancilla_modes:
            raise ValueError(f"ancilla_preparation needs {self.n_ancilla_modes} entries, got {len(prep)}")
        if any(x not in (0, 1) for x in prep):
            raise ValueError("ancilla_preparation entries must be 0 or 1 (single helper photons)")
        if self.unitary.n_modes != self.n_modes:
            raise ValueError(f"unitary acts on {self.unitary.n_modes} modes, circuit has {self.n_modes}")
        if sorted(self.pattern.measured_modes) != list(self.ancilla_modes):
            raise ValueError(f"pattern must measure exactly the ancilla modes {list(self.ancilla_modes)}")

    @property
    def n_modes(self) -> int:
        return self.n_signal_modes + self.n_ancilla_modes

    @property
    def ancilla_modes(self) -> range:
        return range(self.n_signal_modes, self.n_modes)

    @property
    def heralded_counts(self) -> tuple[int, ...]:
        """Required counts ordered by ancilla mode."""
        lookup = dict(zip(self.pattern.measured_modes, self.pattern.required_counts))
        return tuple(lookup[m] for m in self.ancilla_modes)

    def to_json_dict(self) -> dict:
        return {
            "n_signal_modes": self.n_signal_modes,
            "n_ancilla_modes": self.n_ancilla_modes,
            "ancilla_preparation": list(self.ancilla_preparation),
            "unitary": self.unitary.to_json_dict(),
            "pattern": self.pattern.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping, tol: float = 1e-10) -> "PostselectedCircuit":
        for key in ("n_signal_modes", "n_ancilla_modes", "ancilla_preparation", "unitary", "pattern"):
            if key not in data:
                raise ValueError(f"circuit JSON is missing field '{key}'")
        try:
            unitary = ModeUnitary.from_json_dict(data["unitary"], tol)
        except ValueError as exc:
            raise ValueError(f"circuit field 'unitary': {exc}") from None
        try:
            pattern = PostselectionPattern.from_json_dict(data["pattern"])
        except ValueError as exc:
            raise ValueError(f"circuit field 'pattern': {exc}") from None
        return cls(int(data["n_signal_modes"]), int(data["n_ancilla_modes"]),
                   tuple(data["ancilla_preparation"]), unitary, pattern)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PostselectedCircuit":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class GateCheckResult:
    is_valid: bool
    success_probability: float
    conditional_matrix: np.ndarray  # rows: spec.output_basis, columns: spec.computational_basis
    deviation: float
    scale: complex

    def column_probabilities(self) -> np.ndarray:
        """Heralding probability for each computational input."""
        return np.sum(np.abs(self.conditional_matrix) ** 2, axis=0)


def _fnorm(occ: Sequence[int]) -> int:
    p = 1
    for c in occ:
        p *= factorial(c)
    return p


class HeraldedMap:
    """Precomputed bookkeeping for evaluating ``M`` of many unitaries with a fixed layout."""

    def __init__(self, spec: GateSpec, ancilla_preparation: Sequence[int], heralded_counts: Sequence[int]):
        prep, herald = tuple(ancilla_preparation), tuple(heralded_counts)
        if len(prep) != len(herald):
            raise ValueError("preparation and herald must cover the same ancilla modes")
        if sum(prep) != sum(herald):
            raise ValueError(f"photon-number bookkeeping mismatch: {sum(prep)} ancilla photons in, "
                             f"{sum(herald)} heralded; the signal sector would change")
        self.spec = spec
        self.shape = spec.embedded_target.shape
        rows = {o: i for i, o in enumerate(spec.output_basis)}
        self.entries = []
        for j, b in enumerate(spec.computational_basis):
            full_in = tuple(b) + prep
            cols = [m for m, c in enumerate(full_in) for _ in range(c)]
            for o in enumerate_basis(spec.n_signal_modes, b.total()):
                full_out = tuple(o) + herald
                r = [m for m, c in enumerate(full_out) for _ in range(c)]
                scale = 1.0 / sqrt(_fnorm(full_in) * _fnorm(full_out))
                self.entries.append((rows[o], j, np.ix_(r, cols), scale))

    def matrix(self, u: np.ndarray) -> np.ndarray:
        m = np.zeros(self.shape, dtype=complex)
        for i, j, idx, scale in self.entries:
            m[i, j] = permanent(u[idx]) * scale
        return m

    def fit(self, m: np.ndarray) -> tuple[complex, float]:
        """Least-squares scalar ``lam`` for ``m ~ lam * T`` and the residual Frobenius norm."""
        t = self.spec.embedded_target
        lam = complex(np.vdot(t, m) / np.vdot(t, t).real)
        return lam, float(np.linalg.norm(m - lam * t))


def check_postselected_gate(circuit: PostselectedCircuit, spec: GateSpec,
                            tol: float = DEFAULT_GATE_TOL) -> GateCheckResult:
    if circuit.n_signal_modes != spec.n_signal_modes:
        raise ValueError(f"circuit has {circuit.n_signal_modes} signal modes, "
                         f"{spec.name} needs {spec.n_signal_modes}")
    hm = HeraldedMap(spec, circuit.ancilla_preparation, circuit.heralded_counts)
    m = hm.matrix(circuit.unitary.matrix)
    lam, dev = hm.fit(m)
    m.setflags(write=False)
    return GateCheckResult(dev <= tol, abs(lam) ** 2, m, dev, lam)


def apply_ideal_gate(state: StateVector, spec: GateSpec, signal_modes: Sequence[int],
                     cutoff: float = 1e-12) -> StateVector:
    """Multiply each amplitude by the target phase of its signal-mode occupation.

    Components outside the gate's computational basis (beyond ``cutoff``)
    raise, since the target action is only defined on that basis.
    """
    modes = list(signal_modes)
    if len(modes) != spec.n_signal_modes or len(set(modes)) != len(modes):
        raise ValueError(f"{spec.name} acts on {spec.n_signal_modes} distinct modes, got {modes}")
    if any(not 0 <= m < state.n_modes for m in modes):
        raise ValueError(f"signal modes {modes} out of range for {state.n_modes} modes")
    phase = dict(zip(spec.computational_basis, spec.target_diagonal))
    out = np.array(state.amplitudes)
    for i, occ in enumerate(state.basis.occupations):
        sig = tuple(occ[m] for m in modes)
        if sig in phase:
            out[i] *= phase[sig]
        elif abs(out[i]) > cutoff:
            raise ValueError(f"{spec.name} is undefined on signal occupation {sig} "
                             f"(amplitude {out[i]:.3g} in {occ!r})")
    return StateVector(state.basis, out)


def run_circuit(state: StateVector, circuit: PostselectedCircuit,
                signal_modes: Sequence[int]) -> PostselectionOutcome:
    """Apply a postselected circuit to ``signal_modes`` of ``state``.

    Ancilla modes are appended after the state's modes, prepared, evolved
    with the circuit unitary and projected on the pattern. Returns the
    :class:`~lopbounds.postselect.PostselectionOutcome` on the original modes.
    """
    modes = list(signal_modes)
    if len(modes) != circuit.n_signal_modes:
        raise ValueError(f"circuit acts on {circuit.n_signal_modes} signal modes, got {modes}")
    n = state.n_modes
    prep = circuit.ancilla_preparation
    full_basis = enumerate_basis(n + len(prep), state.total_photons + sum(prep))
    amps = np.zeros(full_basis.size, dtype=complex)
    for occ, amp in state.items():
        amps[full_basis.index_of(tuple(occ) + prep)] = amp
    full = StateVector(full_basis, amps)
    anc = list(range(n, n + len(prep)))
    full = apply_mode_unitary(full, embed(circuit.unitary, modes + anc, n + len(prep)))
    return postselect(full, PostselectionPattern(tuple(anc), circuit.heralded_counts))

"""Linear-optical mode transformations and their action on Fock states.

A :class:`ModeUnitary` stores the matrix ``S`` describing how the optical
element rewrites creation operators,

    U a_l^dagger U^dagger = sum_j S[j, l] a_j^dagger,

so column ``l`` of ``S`` is where a photon entering mode ``l`` goes. The
matrix appearing in Heisenberg-picture expansions ``U^dagger a_l^dagger U``
is ``S^dagger`` and is available as :attr:`ModeUnitary.heisenberg`.

Two independent routes lift ``S`` to a Fock sector: permanents of
repeated-row/column submatrices (:func:`apply_mode_unitary`) and direct
expansion of the substituted creation-operator polynomial
(:func:`lift_oracle`).
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict, defaultdict
from dataclasses import dataclass
from math import factorial, sqrt
from typing import Mapping, Sequence

import numpy as np

from .fock import DEFAULT_TOL, OccupationVector, StateVector, enumerate_basis

CONVENTION = "schrodinger"


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mode unitary must be square, got shape {m.shape}")
        err = np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) if m.size else 0.0
        if err > self.tol:
            raise ValueError(f"matrix is not unitary (max |SS^dagger - I| = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    @property
    def heisenberg(self) -> np.ndarray:
        """The matrix u with U^dagger a_l^dagger U = sum_j u[j, l] a_j^dagger."""
        return self.matrix.conj().T

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T, self.tol)

    @classmethod
    def identity(cls, n_modes: int) -> "ModeUnitary":
        return cls(np.eye(n_modes))

    def to_json_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "convention": CONVENTION,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping, tol: float = DEFAULT_TOL) -> "ModeUnitary":
        for key in ("n_modes", "matrix"):
            if key not in data:
                raise ValueError(f"unitary JSON is missing field '{key}'")
        if data.get("convention", CONVENTION) != CONVENTION:
            raise ValueError(f"unitary JSON field 'convention' must be '{CONVENTION}', "
                             f"got {data['convention']!r}")
        try:
            m = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
        except (TypeError, ValueError):
            raise ValueError("unitary JSON field 'matrix' must be rows of [re, im] pairs") from None
        n = int(data["n_modes"])
        if m.shape != (n, n):
            raise ValueError(f"unitary JSON field 'matrix' has shape {m.shape}, expected ({n}, {n})")
        return cls(m, tol)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "ModeUnitary":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class BeamSplitterParams:
    """Beam splitter between two modes; cos(theta), sin(theta) are the mixing amplitudes."""

    mode_a: int
    mode_b: int
    theta: float


def _check_mode(mode: int, n_modes: int) -> None:
    if not 0 <= mode < n_modes:
        raise ValueError(f"mode {mode} out of range for {n_modes} modes")


def beam_splitter(params: BeamSplitterParams, n_modes: int) -> ModeUnitary:
    """a_a^dag -> c a_a^dag + s a_b^dag and a_b^dag -> -s a_a^dag + c a_b^dag."""
    a, b = params.mode_a, params.mode_b
    _check_mode(a, n_modes)
    _check_mode(b, n_modes)
    if a == b:
        raise ValueError("beam splitter needs two distinct modes")
    c, s = np.cos(params.theta), np.sin(params.theta)
    m = np.eye(n_modes, dtype=complex)
    m[a, a], m[b, a] = c, s
    m[a, b], m[b, b] = -s, c
    return ModeUnitary(m)


def phase_shifter(mode: int, phi: float, n_modes: int) -> ModeUnitary:
    _check_mode(mode, n_modes)
    m = np.eye(n_modes, dtype=complex)
    m[mode, mode] = np.exp(1j * phi)
    return ModeUnitary(m)


def compose(u: ModeUnitary, v: ModeUnitary) -> ModeUnitary:
    """Apply ``v`` first, then ``u``."""
    if u.n_modes != v.n_modes:
        raise ValueError(f"cannot compose {u.n_modes}-mode and {v.n_modes}-mode unitaries")
    return ModeUnitary(u.matrix @ v.matrix, max(u.tol, v.tol))


def embed(u: ModeUnitary, modes: Sequence[int], n_modes: int) -> ModeUnitary:
    """Act with ``u`` on the listed modes of a larger system, identity elsewhere."""
    if len(modes) != u.n_modes or len(set(modes)) != len(modes):
        raise ValueError(f"need {u.n_modes} distinct target modes, got {list(modes)}")
    for m in modes:
        _check_mode(m, n_modes)
    full = np.eye(n_modes, dtype=complex)
    idx = np.asarray(modes)
    full[np.ix_(idx, idx)] = u.matrix
    return ModeUnitary(full, u.tol)


def haar_unitary(n_modes: int, rng: np.random.Generator) -> ModeUnitary:
    """Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal made positive."""
    z = (rng.standard_normal((n_modes, n_modes)) + 1j * rng.standard_normal((n_modes, n_modes))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return ModeUnitary(q * (d / np.abs(d)))


# -- permanents ---------------------------------------------------------------

def _ryser_gray(a: np.ndarray) -> complex:
    n = a.shape[0]
    cols = [a[:, j].tolist() for j in range(n)]
    row_sums = [0j] * n
    total = 0j
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        col = cols[j]
        if gray >> j & 1:
            row_sums = [r + c for r, c in zip(row_sums, col)]
        else:
            row_sums = [r - c for r, c in zip(row_sums, col)]
        prod = 1 + 0j
        for r in row_sums:
            prod *= r
        total += -prod if bin(gray).count("1") & 1 else prod
    return total if n % 2 == 0 else -total


def permanent(m) -> complex:
    """Matrix permanent; Ryser's formula with Gray-code ordering for n >= 3."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])
    return _ryser_gray(a)


def _repeat_indices(occ: Sequence[int]) -> list[int]:
    return [mode for mode, count in enumerate(occ) for _ in range(count)]


def _factorial_norm(occ: Sequence[int]) -> float:
    p = 1
    for c in occ:
        p *= factorial(c)
    return float(p)


def transition_amplitude(u: ModeUnitary, input: Sequence[int], output: Sequence[int]) -> complex:
    """<output| U |input> for Fock occupations ``input`` and ``output``."""
    if len(input) != u.n_modes or len(output) != u.n_modes:
        raise ValueError(f"occupations must have {u.n_modes} modes")
    if sum(input) != sum(output):
        raise ValueError(f"photon number mismatch: {sum(input)} in, {sum(output)} out")
    rows, cols = _repeat_indices(output), _repeat_indices(input)
    sub = u.matrix[np.ix_(rows, cols)]
    return permanent(sub) / sqrt(_factorial_norm(input) * _factorial_norm(output))


def _column(u: ModeUnitary, input: Sequence[int], basis) -> np.ndarray:
    cols = _repeat_indices(input)
    in_norm = _factorial_norm(input)
    out = np.empty(basis.size, dtype=complex)
    for i, occ in enumerate(basis.occupations):
        sub = u.matrix[np.ix_(_repeat_indices(occ), cols)]
        out[i] = permanent(sub) / sqrt(in_norm * _factorial_norm(occ))
    return out


class _LiftCache:
    """Bounded memo of lifted sector matrices; thread-safe, results identical to recomputation."""

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            value = self._data.get(key)
            if value is not None:
                self._data.move_to_end(key)
            return value

    def put(self, key, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


lift_cache = _LiftCache()


def sector_matrix(u: ModeUnitary, total_photons: int, use_cache: bool = True) -> np.ndarray:
    """The lift of ``u`` to the sector with ``total_photons`` photons (read-only array)."""
    key = (u.matrix.tobytes(), u.n_modes, total_photons)
    if use_cache:
        hit = lift_cache.get(key)
        if hit is not None:
            return hit
    basis = enumerate_basis(u.n_modes, total_photons)
    mat = np.empty((basis.size, basis.size), dtype=complex)
    for j, occ in enumerate(basis.occupations):
        mat[:, j] = _column(u, occ, basis)
    mat.setflags(write=False)
    if use_cache:
        lift_cache.put(key, mat)
    return mat


def _check_dims(state: StateVector, u: ModeUnitary) -> None:
    if state.n_modes != u.n_modes:
        raise ValueError(f"state has {state.n_modes} modes, unitary acts on {u.n_modes}")


def apply_mode_unitary(state: StateVector, u: ModeUnitary, use_cache: bool = False) -> StateVector:
    """Evolve ``state`` under the linear-optical element ``u``.

    Without the cache only the columns of input occupations carrying weight
    are computed, which is what makes sampling single-occupation LOP states
    cheap.
    """
    _check_dims(state, u)
    if use_cache:
        return StateVector(state.basis, sector_matrix(u, state.total_photons) @ state.amplitudes)
    out = np.zeros(state.basis.size, dtype=complex)
    for occ, amp in state.items():
        out += amp * _column(u, occ, state.basis)
    return StateVector(state.basis, out)


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = defaultdict(complex)
    for mp, cp in p.items():
        for mq, cq in q.items():
            out[tuple(a + b for a, b in zip(mp, mq))] += cp * cq
    return out


def lift_oracle(state: StateVector, u: ModeUnitary) -> StateVector:
    """Reference evolution by substituting a_l^dag -> sum_j S[j,l] a_j^dag and expanding.

    Each basis state is the monomial prod_l (a_l^dag)^n_l / sqrt(n_l!) applied to
    vacuum; after expansion the monomial prod_j (a_j^dag)^m_j contributes
    sqrt(prod_j m_j!) to |m>. No permanents are involved.
    """
    _check_dims(state, u)
    n = u.n_modes
    linear = []
    for l in range(n):
        terms = {}
        for j in range(n):
            if u.matrix[j, l] != 0:
                e = [0] * n
                e[j] = 1
                terms[tuple(e)] = complex(u.matrix[j, l])
        linear.append(terms)

    result: dict = defaultdict(complex)
    for occ, amp in state.items():
        poly = {(0,) * n: amp / sqrt(_factorial_norm(occ))}
        for l, count in enumerate(occ):
            for _ in range(count):
                poly = _poly_mul(poly, linear[l])
        for mono, coeff in poly.items():
            result[mono] += coeff * sqrt(_factorial_norm(mono))

    out = np.zeros(state.basis.size, dtype=complex)
    for mono, coeff in result.items():
        out[state.basis.index_of(mono)] += coeff
    return StateVector(state.basis, out)


def unitary_from_mode_map(first_row: Sequence[complex]) -> ModeUnitary:
    """A unitary whose first row is ``first_row`` (unit norm), completed by QR.

    With this as the Schrodinger matrix, the logical mode with creation
    coefficients ``conj(first_row)`` is routed onto physical mode 0.
    """
    r = np.asarray(first_row, dtype=complex)
    n = r.size
    seed = np.eye(n, dtype=complex)
    seed[:, 0] = r.conj()
    q, rr = np.linalg.qr(seed)
    q[:, 0] *= rr[0, 0] / abs(rr[0, 0])  # undo QR's phase on the leading column
    return ModeUnitary(q.conj().T)

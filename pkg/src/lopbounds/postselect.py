"""Ideal photon-number measurements on subsets of modes, without feedback."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional, Sequence

import numpy as np

from .fock import StateVector, enumerate_basis


@dataclass(frozen=True)
class PostselectionPattern:
    measured_modes: tuple[int, ...]
    required_counts: tuple[int, ...]

    def __post_init__(self):
        modes = tuple(int(m) for m in self.measured_modes)
        counts = tuple(int(c) for c in self.required_counts)
        if len(modes) != len(counts):
            raise ValueError("measured_modes and required_counts must have equal length")
        if len(set(modes)) != len(modes):
            raise ValueError(f"measured modes must be distinct, got {modes}")
        if any(m < 0 for m in modes):
            raise ValueError(f"negative mode index in {modes}")
        if any(c < 0 for c in counts):
            raise ValueError(f"required counts must be non-negative, got {counts}")
        object.__setattr__(self, "measured_modes", modes)
        object.__setattr__(self, "required_counts", counts)

    @classmethod
    def from_mapping(cls, counts: Mapping[int, int]) -> "PostselectionPattern":
        return cls(tuple(counts), tuple(counts.values()))

    @property
    def total(self) -> int:
        return sum(self.required_counts)

    def to_json_dict(self) -> dict:
        return {"measured_modes": list(self.measured_modes), "required_counts": list(self.required_counts)}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "PostselectionPattern":
        for key in ("measured_modes", "required_counts"):
            if key not in data or not isinstance(data[key], list):
                raise ValueError(f"pattern JSON field '{key}' must be a list of integers")
        return cls(tuple(data["measured_modes"]), tuple(data["required_counts"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "PostselectionPattern":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class PostselectionOutcome:
    probability: float
    conditional_state: Optional[StateVector]


def _split(state: StateVector, pattern: PostselectionPattern):
    for m in pattern.measured_modes:
        if m >= state.n_modes:
            raise ValueError(f"measured mode {m} out of range for {state.n_modes} modes")
    if pattern.total > state.total_photons:
        raise ValueError(f"pattern requires {pattern.total} photons, state has {state.total_photons}")
    measured = set(pattern.measured_modes)
    kept = [m for m in range(state.n_modes) if m not in measured]
    return kept


def project(state: StateVector, pattern: PostselectionPattern) -> np.ndarray:
    """Unnormalized amplitudes on the unmeasured modes for the given outcome.

    Remaining modes keep their relative order and are re-indexed from 0.
    """
    kept = _split(state, pattern)
    rest = enumerate_basis(len(kept), state.total_photons - pattern.total)
    out = np.zeros(rest.size, dtype=complex)
    for occ, amp in zip(state.basis.occupations, state.amplitudes):
        if all(occ[m] == c for m, c in zip(pattern.measured_modes, pattern.required_counts)):
            out[rest.index_of([occ[m] for m in kept])] = amp
    return out


def postselect(state: StateVector, pattern: PostselectionPattern) -> PostselectionOutcome:
    kept = _split(state, pattern)
    amps = project(state, pattern)
    prob = float(np.vdot(amps, amps).real)
    if prob <= 0.0:
        return PostselectionOutcome(0.0, None)
    rest = enumerate_basis(len(kept), state.total_photons - pattern.total)
    return PostselectionOutcome(min(prob, 1.0), StateVector(rest, amps / np.sqrt(prob)))


def joint_count_distribution(state: StateVector, modes: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Probability of each joint photon count on ``modes``."""
    for m in modes:
        if not 0 <= m < state.n_modes:
            raise ValueError(f"mode {m} out of range for {state.n_modes} modes")
    dist: dict = defaultdict(float)
    for occ, amp in zip(state.basis.occupations, state.amplitudes):
        p = abs(amp) ** 2
        if p > 0:
            dist[tuple(occ[m] for m in modes)] += p
    return dict(dist)


def marginal_count_distribution(state: StateVector, mode: int) -> dict[int, float]:
    """Photon-count distribution of a single physical mode."""
    return {k[0]: p for k, p in joint_count_distribution(state, [mode]).items()}


def all_patterns(measured_modes: Sequence[int], max_total: int):
    """Every pattern on ``measured_modes`` with at most ``max_total`` photons."""
    for counts in product(range(max_total + 1), repeat=len(measured_modes)):
        if sum(counts) <= max_total:
            yield PostselectionPattern(tuple(measured_modes), counts)

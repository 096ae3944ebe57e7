"""Photon-number statistics of linear-optics states and the NS/CS success bounds.

Every state produced by single photons and a linear-optical network has at
most one expected photon in any mode. The two bound protocols use one NS
(resp. CS) application to reach a state whose target mode holds 2 (resp.
4/3) expected photons; heralding that state with probability ``p`` then
forces ``p * E <= 1``, giving 1/2 and 3/4.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .fock import (DEFAULT_TOL, LogicalMode, StateVector, basis_state, enumerate_basis,
                   fidelity_up_to_phase, single_photon_state)
from .gates import (GateSpec, PostselectedCircuit, apply_ideal_gate, check_postselected_gate,
                    cs_protocol_spec, cs_spec, ns_spec, run_circuit)
from .optics import BeamSplitterParams, ModeUnitary, apply_mode_unitary, beam_splitter, haar_unitary
from .postselect import PostselectionPattern, postselect

NS_TARGET_EXPECTATION = Fraction(2)
CS_TARGET_EXPECTATION = Fraction(4, 3)
BEST_KNOWN = {"NS": Fraction(1, 4), "CS": Fraction(2, 27)}

Number = Union[float, Fraction, int]


def expected_photon_number(state: StateVector, mode: Union[LogicalMode, int],
                           tol: float = DEFAULT_TOL) -> float:
    """<psi| b^dagger b |psi> for the logical annihilator b = sum_j conj(c_j) a_j."""
    if isinstance(mode, (int, np.integer)):
        mode = LogicalMode.physical(int(mode), state.n_modes)
    if mode.n_modes != state.n_modes:
        raise ValueError(f"logical mode spans {mode.n_modes} modes, state has {state.n_modes}")
    if not state.is_normalized(tol):
        raise ValueError(f"state is not normalized (norm {state.norm():.12g})")
    if state.total_photons == 0:
        return 0.0
    lower = enumerate_basis(state.n_modes, state.total_photons - 1)
    out = np.zeros(lower.size, dtype=complex)
    cbar = mode.coeffs.conj()
    for occ, amp in state.items():
        for j, n_j in enumerate(occ):
            if n_j and cbar[j] != 0:
                reduced = list(occ)
                reduced[j] -= 1
                out[lower.index_of(reduced)] += cbar[j] * np.sqrt(n_j) * amp
    return float(np.vdot(out, out).real)


def as_rational(x: Number, tol: float = 1e-10, max_denominator: int = 1000) -> Fraction:
    """Snap ``x`` to the nearest small-denominator fraction, refusing if it is farther than ``tol``."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    f = Fraction(x).limit_denominator(max_denominator)
    if abs(float(f) - x) > tol:
        raise ValueError(f"{x!r} is not within {tol} of a fraction with denominator <= {max_denominator}")
    return f


def bound_from_expectation(target_expectation: Number) -> Number:
    """Largest heralding probability ``p`` compatible with ``p * E <= 1``.

    Fractions stay exact; floats give floats.
    """
    if target_expectation <= 0:
        raise ValueError(f"target expectation must be positive, got {target_expectation}")
    if isinstance(target_expectation, (Fraction, int)):
        return min(Fraction(1), 1 / Fraction(target_expectation))
    return min(1.0, 1.0 / float(target_expectation))


def gate_bound(name: str) -> Fraction:
    expectation = {"NS": NS_TARGET_EXPECTATION, "CS": CS_TARGET_EXPECTATION}[name.upper()]
    return bound_from_expectation(expectation)


# -- random LOP states and the one-photon-per-mode theorem ---------------------

def _sample(n_modes: int, k_photons: int, rng: np.random.Generator) -> tuple[StateVector, ModeUnitary]:
    if not 0 <= k_photons <= n_modes:
        raise ValueError(f"need 0 <= k_photons <= n_modes, got k={k_photons}, n={n_modes}")
    u = haar_unitary(n_modes, rng)
    return apply_mode_unitary(single_photon_state(n_modes, range(k_photons)), u), u


def sample_lop_state(n_modes: int, k_photons: int, seed=None) -> StateVector:
    """Single photons in modes 0..k-1 sent through a Haar-random network."""
    return _sample(n_modes, k_photons, np.random.default_rng(seed))[0]


@dataclass
class Theorem1Report:
    trials: int
    max_observed_expectation: float
    configurations: list[tuple[int, int, int]]  # (n_modes, k_photons, seed)
    per_config_max: dict[tuple[int, int], float] = field(default_factory=dict)
    max_identity_error: float = 0.0
    tolerance: float = 1e-9
    identity_tolerance: float = 1e-10

    @property
    def passed(self) -> bool:
        return (self.max_observed_expectation <= 1 + self.tolerance
                and self.max_identity_error <= self.identity_tolerance)

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "max_observed_expectation": self.max_observed_expectation,
            "max_identity_error": self.max_identity_error,
            "tolerance": self.tolerance,
            "identity_tolerance": self.identity_tolerance,
            "passed": self.passed,
            "configurations": [{"n_modes": n, "k_photons": k, "seed": s} for n, k, s in self.configurations],
            "per_config_max": [{"n_modes": n, "k_photons": k, "max_expectation": v}
                               for (n, k), v in self.per_config_max.items()],
        }


DEFAULT_THEOREM1_CONFIGS = ((2, 1), (3, 2), (4, 2), (4, 4), (6, 3))


def _trial(n: int, k: int, seed: int, config_index: int, trial: int) -> tuple[float, float]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, config_index, trial]))
    state, u = _sample(n, k, rng)
    expectations = np.array([expected_photon_number(state, m) for m in range(n)])
    # <n_m> = sum_{j<k} |u_hat[j, m]|^2 with u_hat = S^dagger
    closed_form = np.sum(np.abs(u.heisenberg[:k, :]) ** 2, axis=0)
    return float(expectations.max()), float(np.max(np.abs(expectations - closed_form)))


def verify_theorem1(configs: Sequence[tuple[int, int]] = DEFAULT_THEOREM1_CONFIGS,
                    trials_per_config: int = 200, seed: int = 20030113,
                    tol: float = 1e-9, identity_tol: float = 1e-10,
                    workers: int = 1) -> Theorem1Report:
    """Sample LOP states and check every mode holds at most one expected photon.

    Trial ``t`` of configuration ``i`` draws from ``SeedSequence([seed, i, t])``,
    so the report does not depend on ``workers``.
    """
    if trials_per_config < 1:
        raise ValueError("trials_per_config must be >= 1")
    jobs = [(n, k, seed, i, t) for i, (n, k) in enumerate(configs) for t in range(trials_per_config)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda job: _trial(*job), jobs))
    else:
        results = [_trial(*job) for job in jobs]

    per_config: dict = {}
    max_err = 0.0
    for (n, k, *_), (mx, err) in zip(jobs, results):
        per_config[(n, k)] = max(per_config.get((n, k), 0.0), mx)
        max_err = max(max_err, err)
    return Theorem1Report(
        trials=len(jobs),
        max_observed_expectation=max(per_config.values()),
        configurations=[(n, k, seed) for n, k in configs],
        per_config_max=per_config,
        max_identity_error=max_err,
        tolerance=tol,
        identity_tolerance=identity_tol,
    )


# -- protocols -----------------------------------------------------------------

@dataclass
class ProtocolTrace:
    steps: list[tuple[str, StateVector]]
    final_state: StateVector
    claimed_success_probability: float
    gate_applications: int = 0
    construction: Optional[dict] = None

    def snapshot(self, label: str) -> StateVector:
        for name, state in self.steps:
            if name == label:
                return state
        raise KeyError(label)

    def to_json_dict(self) -> dict:
        out = {
            "steps": [{"label": label, "state": s.to_json_dict()} for label, s in self.steps],
            "final_state": self.final_state.to_json_dict(),
            "claimed_success_probability": self.claimed_success_probability,
            "gate_applications": self.gate_applications,
        }
        if self.construction is not None:
            out["construction"] = self.construction
        return out


def _apply_gate(state: StateVector, gate, spec: GateSpec, modes: Sequence[int]) -> tuple[StateVector, float]:
    """Apply the ideal gate (``gate is None``) or a heralded circuit; return state and heralding probability."""
    if gate is None or gate == "ideal":
        return apply_ideal_gate(state, spec, modes), 1.0
    if not isinstance(gate, PostselectedCircuit):
        raise TypeError(f"expected None, 'ideal' or a PostselectedCircuit, got {type(gate).__name__}")
    check = check_postselected_gate(gate, spec)
    if not check.is_valid:
        raise ValueError(f"circuit does not implement {spec.name} on the protocol's inputs "
                         f"(deviation {check.deviation:.3e})")
    outcome = run_circuit(state, gate, modes)
    if outcome.conditional_state is None:
        raise ValueError("circuit heralds with probability zero")
    return outcome.conditional_state, outcome.probability


NS_SPLIT_ANGLE = np.pi / 8
NS_RECOMBINE_ANGLE = -np.pi / 4  # sends (a + b)/sqrt(2) onto mode a


def run_ns_two_photon_protocol(ns: Union[None, str, PostselectedCircuit] = None) -> ProtocolTrace:
    """|11> -> pi/8 splitter -> NS on mode a -> recombining 50/50 splitter -> |20>."""
    steps = []
    state = single_photon_state(2, [0, 1])
    steps.append(("prepare |11>", state))
    state = apply_mode_unitary(state, beam_splitter(BeamSplitterParams(0, 1, NS_SPLIT_ANGLE), 2))
    steps.append(("beam splitter pi/8", state))
    state, p = _apply_gate(state, ns, ns_spec(), [0])
    steps.append(("NS on mode a", state))
    state = apply_mode_unitary(state, beam_splitter(BeamSplitterParams(0, 1, NS_RECOMBINE_ANGLE), 2))
    steps.append(("50/50 recombination", state))
    return ProtocolTrace(steps, state, p, gate_applications=1)


CS_SPLIT_ANGLE = float(np.arccos(1 / np.sqrt(3)))
CS_ROTATION_ANGLE = -np.pi / 8  # U1|10> = cos(pi/8)|10> - sin(pi/8)|01>
CS_LOGICAL_MODE = LogicalMode(np.ones(3) / np.sqrt(3))


def run_cs_three_mode_protocol(cs: Union[None, str, PostselectedCircuit] = None) -> ProtocolTrace:
    """|110> -> (b,c) splitter -> U1 on (a,b) -> CS on (b,c) -> U1^-1 -> uniform W-like state.

    The gate is checked against CS extended by identity on |20>, because
    U1|110> carries a |020> component through the gate unchanged.
    """
    steps = []
    state = single_photon_state(3, [0, 1])
    steps.append(("prepare |110>", state))
    state = apply_mode_unitary(state, beam_splitter(BeamSplitterParams(1, 2, CS_SPLIT_ANGLE), 3))
    steps.append(("beam splitter (b,c)", state))
    u1 = beam_splitter(BeamSplitterParams(0, 1, CS_ROTATION_ANGLE), 3)
    state = apply_mode_unitary(state, u1)
    steps.append(("U1 on (a,b)", state))
    state, p = _apply_gate(state, cs, cs_protocol_spec(), [1, 2])
    steps.append(("CS on (b,c)", state))
    state = apply_mode_unitary(state, u1.dagger())
    steps.append(("U1 inverse", state))
    return ProtocolTrace(steps, state, p, gate_applications=1)


def ns_target_state() -> StateVector:
    return basis_state((2, 0))


def cs_target_state() -> StateVector:
    return StateVector.from_dict({(1, 1, 0): 1, (1, 0, 1): 1, (0, 1, 1): 1}, normalize=True)


# -- entangled state from one CS -----------------------------------------------

ENTANGLED_TARGET = {(1, 1, 0, 0): 1, (0, 0, 1, 1): 1}
_ANGLES = (np.pi / 4, -np.pi / 4)


class ConstructionNotFound(RuntimeError):
    pass


def _matchings(modes: Sequence[int]):
    if not modes:
        yield []
        return
    first, rest = modes[0], modes[1:]
    for i, partner in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, partner)] + tail


def _layouts(n_modes: int, n_aux: int):
    total = n_modes + n_aux
    for photons in itertools.combinations(range(n_modes), 2):
        for matching in _matchings(list(range(n_modes))):
            for angles in itertools.product(_ANGLES, repeat=len(matching)):
                for cs_modes in itertools.combinations(range(n_modes), 2):
                    for final in itertools.combinations(range(total), 2):
                        if n_aux and final[1] < n_modes:
                            continue
                        for final_angle in _ANGLES:
                            yield {
                                "photon_modes": list(photons),
                                "first_layer": [[a, b, th] for (a, b), th in zip(matching, angles)],
                                "cs_modes": list(cs_modes),
                                "final_splitter": [final[0], final[1], final_angle],
                                "aux_modes": list(range(n_modes, total)),
                            }


def _run_layout(layout: dict, n_modes: int) -> ProtocolTrace:
    total = n_modes + len(layout["aux_modes"])
    steps = []
    state = single_photon_state(total, layout["photon_modes"])
    steps.append(("prepare single photons", state))
    for a, b, th in layout["first_layer"]:
        state = apply_mode_unitary(state, beam_splitter(BeamSplitterParams(a, b, th), total), use_cache=True)
    steps.append(("first splitter layer", state))
    state = apply_ideal_gate(state, cs_spec(), layout["cs_modes"])
    steps.append(("CS", state))
    a, b, th = layout["final_splitter"]
    state = apply_mode_unitary(state, beam_splitter(BeamSplitterParams(a, b, th), total), use_cache=True)
    steps.append(("final splitter", state))
    p = 1.0
    if layout["aux_modes"]:
        aux = layout["aux_modes"]
        outcome = postselect(state, PostselectionPattern(tuple(aux), (0,) * len(aux)))
        if outcome.conditional_state is None:
            raise ValueError("auxiliary postselection never succeeds")
        state, p = outcome.conditional_state, outcome.probability
        steps.append(("postselect auxiliary vacuum", state))
    return ProtocolTrace(steps, state, p, gate_applications=1, construction=layout)


def build_entangled_cs_state(allow_postselection: bool = True, tol: float = 1e-8) -> ProtocolTrace:
    """Find a layout turning |11> into (|1100> + |0011>)/sqrt(2) with one CS.

    Candidates: two single photons on four modes, a layer of 50/50 splitters,
    one CS on a mode pair, a final 50/50 splitter. If none works and
    ``allow_postselection`` is set, the final splitter may also reach one
    auxiliary vacuum mode that is heralded empty. The first construction
    reaching fidelity ``1 - tol`` is returned together with its layout.
    """
    target = StateVector.from_dict(ENTANGLED_TARGET, normalize=True)
    for n_aux in ((0, 1) if allow_postselection else (0,)):
        for layout in _layouts(4, n_aux):
            try:
                trace = _run_layout(layout, 4)
            except ValueError:
                continue
            if fidelity_up_to_phase(trace.final_state, target) >= 1 - tol:
                return trace
    raise ConstructionNotFound("construction not found: no searched layout yields (|1100> + |0011>)/sqrt(2)")

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lopbounds.bounds import (CS_LOGICAL_MODE, ConstructionNotFound, as_rational, bound_from_expectation,
                              build_entangled_cs_state, cs_target_state, expected_photon_number, gate_bound,
                              ns_target_state, run_cs_three_mode_protocol, run_ns_two_photon_protocol,
                              sample_lop_state, verify_theorem1)
from lopbounds.fock import LogicalMode, StateVector, basis_state, fidelity_up_to_phase, single_photon_state
from lopbounds.gates import PostselectedCircuit
from lopbounds.optics import apply_mode_unitary, haar_unitary, unitary_from_mode_map
from lopbounds.postselect import joint_count_distribution

from conftest import DATA, random_state


def load_circuit(name):
    return PostselectedCircuit.from_json((DATA / name).read_text())


class TestExpectedPhotonNumber:
    def test_number_state(self):
        assert expected_photon_number(basis_state((2,)), 0) == pytest.approx(2, abs=1e-15)

    def test_cs_logical_mode(self):
        psi = StateVector.from_dict({(1, 1, 0): 1, (1, 0, 1): 1, (0, 1, 1): 1}, normalize=True)
        assert abs(expected_photon_number(psi, CS_LOGICAL_MODE) - 4 / 3) <= 1e-12

    def test_single_photon(self, rng):
        u = haar_unitary(3, rng)
        psi = apply_mode_unitary(single_photon_state(3, [0]), u)
        for m in range(3):
            assert abs(expected_photon_number(psi, m) - abs(u.matrix[m, 0]) ** 2) <= 1e-12

    def test_rejects_unnormalized(self):
        psi = StateVector.from_dict({(1, 0): 2})
        with pytest.raises(ValueError, match="normalized"):
            expected_photon_number(psi, 0)

    def test_vacuum(self):
        assert expected_photon_number(basis_state((0, 0)), 1) == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 4), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    def test_logical_mode_reduction(self, n, k, seed):
        """A logical mode's occupation equals physical mode 0's after routing it there."""
        rng = np.random.default_rng(seed)
        psi = random_state(n, k, rng)
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c /= np.linalg.norm(c)
        u = unitary_from_mode_map(c.conj())
        lhs = expected_photon_number(psi, LogicalMode(c))
        rhs = expected_photon_number(apply_mode_unitary(psi, u), 0)
        assert abs(lhs - rhs) <= 1e-10


class TestSampling:
    def test_one_mode(self):
        for seed in range(5):
            psi = sample_lop_state(1, 1, seed)
            assert abs(abs(psi.amplitude((1,))) - 1) <= 1e-12

    def test_k_equals_n_saturates(self):
        for seed in range(5):
            psi = sample_lop_state(2, 2, seed)
            assert abs(expected_photon_number(psi, 0) - 1) <= 1e-10

    def test_golden_state(self):
        golden = StateVector.from_json_dict(json.loads((DATA / "lop_state_n4_k2_seed7.json").read_text()))
        fresh = sample_lop_state(4, 2, 7)
        assert np.array_equal(golden.amplitudes, fresh.amplitudes)

    def test_too_many_photons(self):
        with pytest.raises(ValueError):
            sample_lop_state(2, 3, 0)


class TestTheorem1:
    def test_single_photon_total(self):
        rep = verify_theorem1([(3, 1)], trials_per_config=20, seed=4)
        assert rep.passed and rep.max_observed_expectation <= 1 + 1e-9

    def test_single_photon_sum_over_modes(self):
        for seed in range(10):
            psi = sample_lop_state(3, 1, seed)
            assert abs(sum(expected_photon_number(psi, m) for m in range(3)) - 1) <= 1e-12

    def test_full_occupation(self):
        for seed in range(10):
            psi = sample_lop_state(4, 4, seed)
            for m in range(4):
                assert abs(expected_photon_number(psi, m) - 1) <= 1e-10

    def test_six_modes_three_photons(self):
        rep = verify_theorem1([(6, 3)], trials_per_config=1000, seed=11)
        assert rep.trials == 1000
        assert rep.max_observed_expectation <= 1 + 1e-9
        assert rep.max_identity_error <= 1e-10

    def test_report_is_worker_independent(self):
        a = verify_theorem1([(3, 2), (4, 2)], trials_per_config=15, seed=5, workers=1)
        b = verify_theorem1([(3, 2), (4, 2)], trials_per_config=15, seed=5, workers=4)
        assert a.to_json_dict() == b.to_json_dict()

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            verify_theorem1([(2, 1)], trials_per_config=0)


class TestBoundArithmetic:
    def test_values(self):
        assert bound_from_expectation(Fraction(2)) == Fraction(1, 2)
        assert bound_from_expectation(Fraction(4, 3)) == Fraction(3, 4)
        assert bound_from_expectation(1) == 1
        assert bound_from_expectation(2.0) == 0.5
        assert bound_from_expectation(0.5) == 1.0

    def test_non_positive(self):
        with pytest.raises(ValueError):
            bound_from_expectation(0)
        with pytest.raises(ValueError):
            bound_from_expectation(-1.0)

    def test_gate_bounds(self):
        assert gate_bound("NS") == Fraction(1, 2) and gate_bound("cs") == Fraction(3, 4)

    def test_as_rational(self):
        assert as_rational(1.3333333333333337) == Fraction(4, 3)
        with pytest.raises(ValueError):
            as_rational(np.pi)


class TestNSProtocol:
    def test_ideal(self):
        trace = run_ns_two_photon_protocol()
        step2 = trace.snapshot("beam splitter pi/8")
        assert np.max(np.abs(step2.amplitudes - [-0.5, 1 / np.sqrt(2), 0.5])) <= 1e-10
        assert abs(fidelity_up_to_phase(trace.final_state, ns_target_state()) - 1) <= 1e-10
        assert trace.claimed_success_probability == 1 and trace.gate_applications == 1

    def test_after_ns_is_symmetric_two_photon_state(self):
        after = run_ns_two_photon_protocol().snapshot("NS on mode a")
        assert np.allclose(after.amplitudes, [0.5, 1 / np.sqrt(2), 0.5], atol=1e-12)

    def test_snapshots_normalized(self):
        for _, s in run_ns_two_photon_protocol().steps:
            assert s.is_normalized()

    def test_bound(self):
        e = expected_photon_number(run_ns_two_photon_protocol().final_state, 0)
        assert bound_from_expectation(as_rational(e)) == Fraction(1, 2)

    def test_with_quarter_circuit(self):
        trace = run_ns_two_photon_protocol(load_circuit("ns_quarter_circuit.json"))
        assert abs(trace.claimed_success_probability - 0.25) <= 1e-8
        assert abs(fidelity_up_to_phase(trace.final_state, ns_target_state()) - 1) <= 1e-8

    def test_invalid_circuit(self):
        bad = load_circuit("ns_quarter_circuit.json").to_json_dict()
        bad["pattern"]["required_counts"] = [0, 1]
        with pytest.raises(ValueError, match="does not implement"):
            run_ns_two_photon_protocol(PostselectedCircuit.from_json_dict(bad))

    def test_golden_trace(self):
        golden = json.loads((DATA / "ns_protocol_trace.json").read_text())
        fresh = run_ns_two_photon_protocol().to_json_dict()
        assert [s["label"] for s in golden["steps"]] == [s["label"] for s in fresh["steps"]]
        for g, f in zip(golden["steps"], fresh["steps"]):
            assert np.allclose(g["state"]["amplitudes"], f["state"]["amplitudes"], atol=1e-14)


class TestCSProtocol:
    def test_ideal(self):
        trace = run_cs_three_mode_protocol()
        assert abs(fidelity_up_to_phase(trace.final_state, cs_target_state()) - 1) <= 1e-10
        assert abs(expected_photon_number(trace.final_state, CS_LOGICAL_MODE) - 4 / 3) <= 1e-10

    def test_step2_snapshot(self):
        step2 = run_cs_three_mode_protocol().snapshot("beam splitter (b,c)")
        expected = StateVector.from_dict({(1, 1, 0): 1 / np.sqrt(3), (1, 0, 1): np.sqrt(2 / 3)})
        assert np.max(np.abs(step2.amplitudes - expected.amplitudes)) <= 1e-12

    def test_step3_snapshot(self):
        c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
        step3 = run_cs_three_mode_protocol().snapshot("U1 on (a,b)")
        # the |101> and |011> amplitudes come from U1 acting on the |101> branch
        assert abs(step3.amplitude((1, 0, 1)) - np.sqrt(2 / 3) * c) <= 1e-12
        assert abs(step3.amplitude((0, 1, 1)) + np.sqrt(2 / 3) * s) <= 1e-12

    def test_bound(self):
        e = expected_photon_number(run_cs_three_mode_protocol().final_state, CS_LOGICAL_MODE)
        assert bound_from_expectation(as_rational(e)) == Fraction(3, 4)

    def test_circuit_without_20_passthrough_is_rejected(self):
        with pytest.raises(ValueError, match="does not implement"):
            run_cs_three_mode_protocol(load_circuit("cs_2_27_circuit.json"))

    def test_golden_trace(self):
        golden = json.loads((DATA / "cs_protocol_trace.json").read_text())
        fresh = run_cs_three_mode_protocol().to_json_dict()
        for g, f in zip(golden["steps"], fresh["steps"]):
            assert g["label"] == f["label"]
            assert np.allclose(g["state"]["amplitudes"], f["state"]["amplitudes"], atol=1e-14)


class TestEntangled:
    def test_construction(self):
        trace = build_entangled_cs_state()
        target = StateVector.from_dict({(1, 1, 0, 0): 1, (0, 0, 1, 1): 1}, normalize=True)
        assert fidelity_up_to_phase(trace.final_state, target) >= 1 - 1e-8
        assert trace.gate_applications == 1
        assert sum(label == "CS" for label, _ in trace.steps) == 1
        dist = {k: v for k, v in joint_count_distribution(trace.final_state, [0, 1]).items() if v > 1e-12}
        assert dist.keys() == {(0, 0), (1, 1)}
        assert dist[(0, 0)] == pytest.approx(0.5, abs=1e-10) and dist[(1, 1)] == pytest.approx(0.5, abs=1e-10)
        assert trace.construction["aux_modes"] == []

    def test_starts_from_two_single_photons(self):
        first = build_entangled_cs_state().steps[0][1]
        assert first.total_photons == 2 and max(max(o) for o, _ in first.items()) == 1

    def test_impossible_tolerance_reports_not_found(self):
        with pytest.raises(ConstructionNotFound, match="construction not found"):
            build_entangled_cs_state(allow_postselection=False, tol=-1.0)

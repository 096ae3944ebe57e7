import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lopbounds.bounds import expected_photon_number, run_cs_three_mode_protocol
from lopbounds.fock import basis_state, fidelity_up_to_phase
from lopbounds.optics import BeamSplitterParams, apply_mode_unitary, beam_splitter
from lopbounds.postselect import (PostselectionPattern, all_patterns, joint_count_distribution,
                                  marginal_count_distribution, postselect)

from conftest import random_state


def fifty_fifty(n=2):
    return beam_splitter(BeamSplitterParams(0, 1, np.pi / 4), n)


class TestPostselect:
    def test_two_photon_state_with_probability_half(self):
        out = apply_mode_unitary(basis_state((1, 1)), fifty_fifty())
        res = postselect(out, PostselectionPattern((1,), (0,)))
        assert abs(res.probability - 0.5) <= 1e-12
        assert res.conditional_state.n_modes == 1
        assert fidelity_up_to_phase(res.conditional_state, basis_state((2,))) == pytest.approx(1, abs=1e-12)

    def test_empty_pattern(self, rng):
        psi = random_state(3, 2, rng)
        res = postselect(psi, PostselectionPattern((), ()))
        assert res.probability == pytest.approx(1, abs=1e-12)
        assert np.allclose(res.conditional_state.amplitudes, psi.amplitudes)

    def test_product_state(self):
        res = postselect(basis_state((1, 1)), PostselectionPattern((1,), (1,)))
        assert res.probability == 1
        assert res.conditional_state.amplitude((1,)) == 1

    def test_zero_probability(self):
        res = postselect(basis_state((1, 1)), PostselectionPattern((1,), (0,)))
        assert res.probability == 0 and res.conditional_state is None

    def test_too_many_photons(self):
        with pytest.raises(ValueError):
            postselect(basis_state((1, 1)), PostselectionPattern((0, 1), (2, 1)))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            postselect(basis_state((1, 1)), PostselectionPattern((2,), (0,)))

    def test_reindexing_keeps_order(self):
        res = postselect(basis_state((1, 0, 2)), PostselectionPattern((1,), (0,)))
        assert res.conditional_state.amplitude((1, 2)) == 1

    def test_measure_everything(self):
        res = postselect(basis_state((1, 1)), PostselectionPattern((0, 1), (1, 1)))
        assert res.probability == 1 and res.conditional_state.n_modes == 0

    def test_pattern_validation(self):
        with pytest.raises(ValueError):
            PostselectionPattern((0, 0), (1, 1))
        with pytest.raises(ValueError):
            PostselectionPattern((0,), (-1,))
        with pytest.raises(ValueError):
            PostselectionPattern((0,), (1, 2))

    def test_pattern_json(self):
        p = PostselectionPattern((2, 3), (1, 0))
        assert p.to_json_dict() == {"measured_modes": [2, 3], "required_counts": [1, 0]}
        assert PostselectionPattern.from_json(p.to_json()) == p


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 3), st.integers(0, 2 ** 32 - 1), st.data())
def test_completeness(n, k, seed, data):
    psi = random_state(n, k, np.random.default_rng(seed))
    modes = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    total = sum(postselect(psi, p).probability for p in all_patterns(modes, k))
    assert abs(total - 1) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_deferred_measurement(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(4, 3, rng)
    a_counts, b_counts = rng.integers(0, 2, size=2)
    joint = postselect(psi, PostselectionPattern((0, 2), (a_counts, b_counts)))
    first = postselect(psi, PostselectionPattern((0,), (a_counts,)))
    if first.conditional_state is None:
        assert joint.probability == 0
        return
    # mode 2 of the original system is mode 1 after removing mode 0
    second = postselect(first.conditional_state, PostselectionPattern((1,), (b_counts,)))
    assert abs(first.probability * second.probability - joint.probability) <= 1e-10
    if joint.conditional_state is not None:
        assert np.allclose(joint.conditional_state.amplitudes, second.conditional_state.amplitudes, atol=1e-10)


class TestMarginals:
    def test_number_state(self):
        assert marginal_count_distribution(basis_state((2, 0)), 0) == {2: 1.0}

    def test_single_photon_split(self):
        out = apply_mode_unitary(basis_state((1, 0)), fifty_fifty())
        dist = marginal_count_distribution(out, 0)
        assert dist[0] == pytest.approx(0.5, abs=1e-15) and dist[1] == pytest.approx(0.5, abs=1e-15)

    def test_cs_final_state(self):
        final = run_cs_three_mode_protocol().final_state
        dist = marginal_count_distribution(final, 0)
        assert dist[0] == pytest.approx(1 / 3, abs=1e-12) and dist[1] == pytest.approx(2 / 3, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            marginal_count_distribution(basis_state((1, 0)), 2)

    def test_consistency_with_expectation(self, rng):
        for _ in range(10):
            psi = random_state(3, 3, rng)
            for m in range(3):
                dist = marginal_count_distribution(psi, m)
                assert abs(sum(dist.values()) - 1) <= 1e-12
                mean = sum(c * p for c, p in dist.items())
                assert abs(mean - expected_photon_number(psi, m)) <= 1e-10

    def test_joint(self):
        d = joint_count_distribution(basis_state((1, 0, 2)), [0, 2])
        assert d == {(1, 2): 1.0}

import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lopbounds.fock import (LogicalMode, OccupationVector, StateVector, basis_state, enumerate_basis,
                            fidelity_up_to_phase, inner_product, single_photon_state)

from conftest import ALPHA, BETA, random_state


class TestEnumerateBasis:
    def test_two_modes_two_photons(self):
        basis = enumerate_basis(2, 2)
        assert list(basis) == [(2, 0), (1, 1), (0, 2)]
        assert basis.size == 3

    def test_vacuum_sector(self):
        basis = enumerate_basis(1, 0)
        assert list(basis) == [(0,)]

    def test_three_modes_two_photons(self):
        basis = enumerate_basis(3, 2)
        assert basis.size == 6
        assert list(basis) == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]

    @given(st.integers(1, 5), st.integers(0, 5))
    def test_bijection_and_closure(self, n, k):
        basis = enumerate_basis(n, k)
        assert basis.size == comb(n + k - 1, k)
        for i in range(basis.size):
            occ = basis.occupation_at(i)
            assert occ.total() == k
            assert basis.index_of(occ) == i

    def test_reverse_lexicographic(self):
        occs = list(enumerate_basis(4, 3))
        assert occs == sorted(occs, reverse=True)

    def test_negative_inputs(self):
        with pytest.raises(ValueError):
            enumerate_basis(2, -1)


def test_occupation_vector_rejects_negative():
    with pytest.raises(ValueError):
        OccupationVector([1, -1])
    assert OccupationVector([2, 1]).total() == 3


class TestSinglePhotonState:
    def test_two_mode(self):
        s = single_photon_state(2, {0, 1})
        assert s.amplitude((1, 1)) == 1
        assert s.norm() == 1

    def test_three_mode(self):
        s = single_photon_state(3, [0, 1])
        assert s.amplitude((1, 1, 0)) == 1

    def test_vacuum(self):
        s = single_photon_state(1, [])
        assert s.total_photons == 0
        assert s.amplitude((0,)) == 1

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            single_photon_state(2, [0, 0])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            single_photon_state(2, [2])


class TestInnerProduct:
    def test_basis_states(self):
        assert inner_product(basis_state((1, 1)), basis_state((1, 1))) == 1
        assert inner_product(basis_state((2, 0)), basis_state((1, 1))) == 0

    def test_step2_state_norm(self):
        s = StateVector.from_dict({(2, 0): -np.sqrt(2) * ALPHA * BETA,
                                   (1, 1): ALPHA ** 2 - BETA ** 2,
                                   (0, 2): np.sqrt(2) * ALPHA * BETA})
        assert abs(inner_product(s, s) - 1) < 1e-12

    def test_conjugate_symmetry(self, rng):
        for _ in range(20):
            x, y = random_state(3, 2, rng), random_state(3, 2, rng)
            assert abs(inner_product(x, y) - np.conj(inner_product(y, x))) < 1e-12
            assert abs(inner_product(x, x).imag) < 1e-15 and inner_product(x, x).real >= 0

    def test_basis_mismatch(self):
        with pytest.raises(ValueError):
            inner_product(basis_state((1, 1)), basis_state((1, 0)))


class TestFidelity:
    def test_global_phase(self):
        s = basis_state((2, 0))
        t = StateVector(s.basis, np.exp(0.7j) * s.amplitudes)
        assert fidelity_up_to_phase(s, t) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal(self):
        assert fidelity_up_to_phase(basis_state((2, 0)), basis_state((1, 1))) == 0


class TestSerialization:
    def test_round_trip(self, rng):
        s = random_state(3, 2, rng)
        t = StateVector.from_json(s.to_json())
        assert np.array_equal(s.amplitudes, t.amplitudes)
        assert t.basis == s.basis

    def test_schema(self):
        d = json.loads(basis_state((1, 1)).to_json())
        assert d == {"n_modes": 2, "total_photons": 2, "amplitudes": [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]}

    def test_wrong_length(self):
        with pytest.raises(ValueError, match="amplitudes"):
            StateVector.from_json_dict({"n_modes": 2, "total_photons": 2, "amplitudes": [[1, 0]]})

    def test_missing_field(self):
        with pytest.raises(ValueError, match="total_photons"):
            StateVector.from_json_dict({"n_modes": 2, "amplitudes": []})


def test_state_is_immutable():
    s = basis_state((1, 0))
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2


def test_logical_mode_requires_unit_norm():
    with pytest.raises(ValueError):
        LogicalMode([1, 1])
    assert LogicalMode.physical(1, 3).coeffs.tolist() == [0, 1, 0]

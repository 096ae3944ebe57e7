from pathlib import Path

import numpy as np
import pytest

from lopbounds.fock import StateVector, enumerate_basis

DATA = Path(__file__).parent / "data"

ALPHA, BETA = np.cos(np.pi / 8), np.sin(np.pi / 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(n_modes, total, rng):
    basis = enumerate_basis(n_modes, total)
    amps = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    return StateVector(basis, amps / np.linalg.norm(amps))

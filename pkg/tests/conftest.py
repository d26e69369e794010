import numpy as np
import pytest

from matconv.sets import HermTuple


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pauli_pair() -> HermTuple:
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    return HermTuple([sx, sz])


def frob(A) -> float:
    return float(np.linalg.norm(np.asarray(A)))

import numpy as np
import pytest

from convgate.core import DensityMatrix, PureState


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_pure_state(rng, qubits=2) -> PureState:
    v = rng.normal(size=2**qubits) + 1j * rng.normal(size=2**qubits)
    return PureState(v / np.linalg.norm(v))


def random_density_matrix(rng, qubits=2, rank=None) -> DensityMatrix:
    """Ginibre-random mixed state."""
    d = 2**qubits
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real, validate=False)


def random_unitary(rng, d=4) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))

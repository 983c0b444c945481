import numpy as np
import pytest

from gapmeasures.spectral import DensityOperator, thermal_state


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def random_density(dim, seed, rank=None):
    rng = np.random.default_rng(seed)
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = a @ a.conj().T
    return DensityOperator.from_matrix(m / np.trace(m).real)


def random_unitary(dim, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def thermal3():
    return thermal_state(np.diag([0.0, 1.0, 2.0]), 1.0)


@pytest.fixture
def thermal4():
    return thermal_state(np.diag([0.0, 1.0, 2.0, 3.0]), 1.0)

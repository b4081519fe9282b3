import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, M):
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return 0.5 * (A + A.conj().T)


def random_psd(rng, M, rank=None):
    rank = M if rank is None else rank
    X = rng.standard_normal((M, rank)) + 1j * rng.standard_normal((M, rank))
    return X @ X.conj().T

import numpy as np
import pytest


def random_spd(rng, n, ridge=1.0):
    B = rng.standard_normal((n, n))
    return B @ B.T + ridge * np.eye(n)


def random_sym(rng, n):
    B = rng.standard_normal((n, n))
    return B + B.T


@pytest.fixture
def rng():
    return np.random.default_rng(20190401)

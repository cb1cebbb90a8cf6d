import numpy as np
import pytest

from ulda import Dataset


def random_dataset(rng, n_max=50, m_max=8, j_max=4, shift=2.0):
    """Random continuous dataset with every class present and full-rank scatter."""
    m = int(rng.integers(1, m_max + 1))
    j = int(rng.integers(2, j_max + 1))
    n = int(rng.integers(m + j + 2, max(n_max, m + j + 3) + 1))
    y = rng.integers(0, j, n)
    while np.unique(y).size < j:
        y = rng.integers(0, j, n)
    X = rng.standard_normal((n, m)) + shift * rng.standard_normal((j, m))[y]
    return Dataset(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

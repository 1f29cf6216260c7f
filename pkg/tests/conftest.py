import numpy as np
import pytest

from fbmcber.filters import make_egf, make_martin
from fbmcber.interference import FbmcGrid, build_set, truncate

M = 16
K = 4


@pytest.fixture(scope="session")
def martin16():
    return make_martin(K, M)


@pytest.fixture(scope="session")
def martin_grid(martin16):
    return FbmcGrid(M, martin16)


@pytest.fixture(scope="session")
def martin_table(martin_grid):
    return build_set(martin_grid)


@pytest.fixture(scope="session")
def martin_top8(martin_table):
    return truncate(martin_table, 8)


@pytest.fixture(scope="session")
def egf_filters():
    return {alpha: make_egf(alpha, K, M) for alpha in (0.25, 1.0)}


def random_symmetric_filter(rng, m, k=3):
    """Random unit-energy even-symmetric filter of length k*m + 1."""
    length = k * m + 1
    half = rng.normal(size=(length + 1) // 2)
    taps = np.concatenate([half, half[:-1][::-1]])
    taps /= np.sqrt(np.dot(taps, taps))
    from fbmcber.filters import PrototypeFilter

    return PrototypeFilter(taps, k, "custom")

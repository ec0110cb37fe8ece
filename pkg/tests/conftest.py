import numpy as np
import pytest

from stopset.gf2 import BitMatrix
from stopset.ldpc import EXAMPLE1_IRREGULAR, build_irregular, code_from_matrix

# rows u1 = {v1, v3, v5, v7}, u2 = {v2, v3, v5}, u3 = {v4, v6, v7}
FIG2 = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 1, 0, 0],
        [0, 0, 0, 1, 0, 1, 1],
    ],
    dtype=np.uint8,
)


@pytest.fixture
def fig2_H():
    return BitMatrix(FIG2)


@pytest.fixture
def fig2_code():
    return code_from_matrix(BitMatrix(FIG2))


@pytest.fixture(scope="session")
def example1_code():
    return build_irregular(1000, EXAMPLE1_IRREGULAR, seed=11)


def random_ldpc_matrix(rng, rows, cols, density=0.35):
    """Small random parity-check matrix with no empty columns."""
    h = (rng.random((rows, cols)) < density).astype(np.uint8)
    for j in np.flatnonzero(h.sum(axis=0) == 0):
        h[rng.integers(rows), j] = 1
    return h

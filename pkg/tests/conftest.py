import numpy as np
import pytest

from eigenplace import CandidatePool


@pytest.fixture
def three_row_pool():
    """The worked 3-row example: rows [1,0], [0,1], [1,1]."""
    return CandidatePool(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))


def random_spd(rs: np.random.Generator, n: int) -> np.ndarray:
    a = rs.normal(size=(n, n))
    return a @ a.T


def random_symmetric(rs: np.random.Generator, n: int) -> np.ndarray:
    a = rs.normal(size=(n, n))
    return 0.5 * (a + a.T)

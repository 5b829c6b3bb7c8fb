import numpy as np
import pytest

from bell import BellDiagonal
from protocols import YieldAnalyzer


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_dists(rng):
    """Bell-diagonal states drawn uniformly from the simplex."""
    return [BellDiagonal.from_sequence(p) for p in rng.dirichlet(np.ones(4), size=50)]


@pytest.fixture
def werner():
    return BellDiagonal.werner


@pytest.fixture
def analyzer():
    # blocks beyond 16 never win on the grids used in the tests
    return YieldAnalyzer(m_range=(2, 16))

import pytest

from kserver import Instance, MetricSpace

# Three-point metric used across the suite: distances 0-1: 1, 1-2: 2, 0-2: 3.
M3_MATRIX = [[0, 1, 3], [1, 0, 2], [3, 2, 0]]


@pytest.fixture
def m3():
    return MetricSpace.from_matrix(M3_MATRIX)


@pytest.fixture
def m3_instance(m3):
    """Two servers at {0, 1}, one request at the far point."""
    return Instance.build(m3, 2, (0, 1), (2,))


@pytest.fixture
def uniform3():
    return MetricSpace.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])

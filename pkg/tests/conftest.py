import numpy as np
import pytest

from critns import Grid


@pytest.fixture
def grid2():
    return Grid(2, 32)


@pytest.fixture
def grid3():
    return Grid(3, 16)


@pytest.fixture
def grid3m():
    return Grid(3, 32)


def rel_err(a, b):
    denom = np.max(np.abs(b))
    if denom == 0:
        return np.max(np.abs(a))
    return np.max(np.abs(a - b)) / denom


def l2_rel(a, b):
    denom = np.sqrt(np.sum(b**2))
    if denom == 0:
        return np.sqrt(np.sum(a**2))
    return np.sqrt(np.sum((a - b) ** 2)) / denom

import numpy as np
import pytest

from stagewise.data import RawDataset, StandardizedProblem, SyntheticSpec, generate_synthetic, standardize


@pytest.fixture
def t1():
    """Hand instance: X = I_2, y = (3, 1), uncentered."""
    return standardize(RawDataset(np.eye(2), [3.0, 1.0]), center=False)


@pytest.fixture
def dup():
    """Two identical unit columns; y equals the column."""
    c = np.array([1.0, 2.0, 2.0]) / 3.0
    return StandardizedProblem(np.c_[c, c], c)


def make_problem(n=30, p=10, rho=0.0, seed=0, center=True, support=5):
    spec = SyntheticSpec(n, p, rho, 1.0, min(support, p), seed)
    return standardize(generate_synthetic(spec).data, center=center)


@pytest.fixture
def small():
    return make_problem(30, 10, 0.3, seed=11)


@pytest.fixture
def wide():
    return make_problem(20, 40, 0.5, seed=12)

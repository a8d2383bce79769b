import numpy as np
import pytest

from udtw.types import CostMatrix, GibbsParams, VarianceField


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_instance(rng, max_len=5, max_dim=3, sigma_range=(0.1, 10.0), max_cost=4.0):
    t = int(rng.integers(1, max_len + 1))
    tp = int(rng.integers(1, max_len + 1))
    C = CostMatrix(rng.uniform(0.0, max_cost, size=(t, tp)))
    S = VarianceField(rng.uniform(*sigma_range, size=(t, tp)))
    return C, S


def gp(gamma=1.0, beta=0.0):
    return GibbsParams(gamma=gamma, beta=beta)

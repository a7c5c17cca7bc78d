import numpy as np
import pytest

from snce.codebook import Codebook, Metric, grid_codebook
from snce.config import GridSpec, MlpSpec, ToyConfig
from snce.neighbor import Temperature


@pytest.fixture
def unit():
    """ Temperature with 2 tau^2 = 1 """
    return Temperature.from_two_tau_sq(1.0)


@pytest.fixture
def three_codes():
    return Codebook([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]], Metric.L2_SQUARED)


@pytest.fixture(scope='session')
def grid():
    return grid_codebook(-5.0, 5.0, 50)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """
    A toy config that trains in well under a second
    """
    return ToyConfig(grid=GridSpec(n_per_axis=10), mlp=MlpSpec(depth=3, hidden_width=16), steps=30, n_samples=40)

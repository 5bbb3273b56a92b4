import numpy as np
import pytest

from attobs import Gains


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def paper_gains():
    return Gains(10.0, 10.0, 0.15, 0.15)


@pytest.fixture
def paper_refs():
    return np.array([0.0, 0.0, 1.0]), np.array([np.sqrt(0.5), 0.0, np.sqrt(0.5)])

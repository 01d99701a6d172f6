import numpy as np
import pytest

from tfdiffuse import arrays
from tfdiffuse.medium import Medium


@pytest.fixture(scope="session")
def afmt():
    return arrays.make_afmt()


@pytest.fixture(scope="session")
def fibo64():
    return arrays.make_fibo64()


@pytest.fixture(scope="session")
def tf24():
    return arrays.make_tf24()


@pytest.fixture(scope="session")
def medium():
    return Medium()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

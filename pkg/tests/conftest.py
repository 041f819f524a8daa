import numpy as np
import pytest

from mlsie.geometry import DomainBox


@pytest.fixture
def unit1():
    return DomainBox.unit(1)


@pytest.fixture
def unit2():
    return DomainBox.unit(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20121003)

import numpy as np
import pytest

from zonalsphere.operators import OperatorContext
from zonalsphere.triads import build_table
from zonalsphere.verify import random_real_field


@pytest.fixture(scope="session")
def table6():
    return build_table(6)


@pytest.fixture(scope="session")
def ctx6(table6):
    return OperatorContext(6, triad_table=table6)


@pytest.fixture(scope="session")
def table8():
    return build_table(8)


@pytest.fixture(scope="session")
def ctx8(table8):
    return OperatorContext(8, triad_table=table8)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture()
def field_factory():
    return random_real_field

import math

import pytest

from slowent.action import compute_spectrum
from slowent.catalog import fibonacci, t4_block

# closed forms: log of the leading roots of x^2 - 3x + 1 and x^2 - 4x + 1
LOG_PHI2 = math.log((3 + math.sqrt(5)) / 2)
LOG_B = math.log(2 + math.sqrt(3))


@pytest.fixture(scope="session")
def fib():
    return fibonacci()


@pytest.fixture(scope="session")
def t4():
    return t4_block()


@pytest.fixture(scope="session")
def fib_spec(fib):
    return compute_spectrum(fib)


@pytest.fixture(scope="session")
def t4_spec(t4):
    return compute_spectrum(t4)

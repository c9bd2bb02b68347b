import numpy as np
import pytest

from jetphase import Constants, minkowski, reissner_nordstrom, schwarzschild

# non-unit m and q so dropped constant factors cannot hide
M_CONST = Constants(m=1.3, q=0.7, c=1.0, hbar=1.0)
N_CONST = Constants(m=1.3, q=0.0, c=1.0, hbar=1.0)


@pytest.fixture(scope="session")
def mk():
    return minkowski(M_CONST)


@pytest.fixture(scope="session")
def mk_unit():
    return minkowski(Constants())


@pytest.fixture(scope="session")
def rn():
    return reissner_nordstrom(M_CONST, k_s=1.0, k_q=0.3, q0=0.7)


@pytest.fixture(scope="session")
def schw():
    return schwarzschild(N_CONST, k_s=1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240815)

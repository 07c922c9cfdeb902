import numpy as np
import pytest

from sharedctl import _kernels
from sharedctl.geometry import circle_path
from sharedctl.params import ControllerParams, ImpedanceParams


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or load from disk cache) before anything is timed
    _kernels.warm_up()


@pytest.fixture(scope="session")
def circle():
    return circle_path()


@pytest.fixture()
def params():
    return ControllerParams()


@pytest.fixture()
def imp_params():
    return ImpedanceParams()


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(987654321)))

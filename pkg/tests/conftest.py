import numpy as np
import pytest

import uavcache as uc
from uavcache import calibrate


@pytest.fixture(scope="session")
def default_cfg():
    """The default profile with calibrated channel constants."""
    return calibrate.resolve(uc.default_config())


@pytest.fixture(scope="session")
def small_cfg(default_cfg):
    """A short-horizon variant for fast environment/agent tests."""
    return default_cfg.replace(horizon_slots=8)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

np.seterr(all="ignore")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

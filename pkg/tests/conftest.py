import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from additive_fields import GAUSSIAN, DAMPED_COSINE, Grid1D, KernelSpec

# numba compilation on first call can blow hypothesis' default deadline
settings.register_profile("artifact", deadline=None, max_examples=50)
settings.load_profile("artifact")

WORKERS = min(4, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def gaussian_spec():
    return KernelSpec(family=GAUSSIAN, variance=1.0, scale=1.0)


@pytest.fixture(scope="session")
def damped_cosine_spec():
    return KernelSpec(family=DAMPED_COSINE, variance=1.0, scale=1.0, omega=1.0)


@pytest.fixture(scope="session")
def quarter_grid():
    return Grid1D(origin=0.0, eps=0.25, count=64)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from latkpp._kernels import backends

settings.register_profile(
    "latkpp",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "latkpp"))

SEED = int(os.environ.get("LATKPP_TEST_SEED", "20240611"))


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(params=sorted(backends()))
def kernels(request):
    """Each available kernel backend in turn (compiled and NumPy fallback)."""
    return backends()[request.param]

import os

# Keep test runs off the rotating log file
os.environ.setdefault("FVELAB_LOG_FILE", "")
os.environ.setdefault("FVELAB_LOG_LEVEL", "WARNING")

import numpy as np
import pytest

from fvelab.services.mesh import uniform_mesh
from fvelab.services.scheme import preset

PUBLISHED_SCHEMES = ["scheme-3-1", "scheme-4-1", "scheme-5-1", "scheme-6-1"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=PUBLISHED_SCHEMES)
def published_scheme(request):
    return preset(request.param)


@pytest.fixture
def unit_mesh():
    return uniform_mesh(4)

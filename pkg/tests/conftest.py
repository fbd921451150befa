import functools

import numpy as np
import pytest

from bornspec import geometry


@functools.lru_cache(maxsize=None)
def sphere(h, R=1.0):
    return geometry.voxelize({"shape": "sphere", "radius": R}, h)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

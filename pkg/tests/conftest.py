import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from epscope.matrix_model import PencilParams, build_pencil

settings.register_profile(
    "epscope", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("epscope")

QUARTER = np.pi / 4


@pytest.fixture
def two_level():
    """eps=(1,2), omega=(2,1), phi=pi/4: EPs at +-i."""
    return build_pencil(PencilParams([1.0, 2.0], [2.0, 1.0], [QUARTER]))


@pytest.fixture
def crossing_lines():
    """Same spectra without mixing: a real degeneracy at lam=1."""
    return build_pencil(PencilParams([1.0, 2.0], [2.0, 1.0], [0.0]))

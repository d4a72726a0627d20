import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def grid1():
    from wavebound import GridSpec
    return GridSpec(1, 1024, 20.0)


@pytest.fixture
def gauss1(grid1):
    return np.exp(-grid1.axis() ** 2)

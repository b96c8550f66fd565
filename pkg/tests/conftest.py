import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pnc_sim.signal_model import Constellation

settings.register_profile("pnc", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pnc")


@pytest.fixture(params=["bpsk", "qpsk"])
def const(request):
    return Constellation.of(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

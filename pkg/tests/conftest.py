import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from selectorkit.hamiltonians import RadialHamiltonian
from selectorkit.profiles import ProfileFunction

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bump(height, plateau_end, support_end, dim=2, corner=None):
    return RadialHamiltonian(ProfileFunction.bump(height, plateau_end, support_end, corner=corner), dim)


@pytest.fixture
def small_bump():
    # sup |h'| = 0.5 / (0.6 - 0.06) < 1: admissible and simple
    return bump(0.5, 0.2, 0.8)


@pytest.fixture
def steep_bump():
    # slope about 3.7: orbits with winding -1, -2, -3
    return bump(2.0, 0.2, 0.8)

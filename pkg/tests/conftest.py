import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from drcp.problem import build_nonconvex_llp_instance, build_section5_instance

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Six-agent optimum. sum ||x - q_i||^2 = 6 ||x||^2 - 12 x2 + 44, evaluated at x2 = sqrt(7)/4.
X_STAR = np.array([0.0, math.sqrt(7.0) / 4.0])
F_STAR = 44.0 + 42.0 / 16.0 - 3.0 * math.sqrt(7.0)


@pytest.fixture(scope="session")
def sec5():
    return build_section5_instance()


@pytest.fixture(scope="session")
def fig9():
    return build_nonconvex_llp_instance()

import math

import pytest
from hypothesis import HealthCheck, settings

from fdnet.model import AntennaSystem, NetworkConfig

settings.register_profile("fdnet", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fdnet")


@pytest.fixture
def omni():
    return AntennaSystem.symmetric(1)


@pytest.fixture
def base_cfg():
    """Unit powers, no noise, alpha = 4, lambda = 0.01, R = 1."""
    return NetworkConfig(lam=0.01, rate=1.0)


ANCHOR_3D = 1.0 - 1.0 / (1.0 + 0.75 * math.pi)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])

"""Shared fixtures plus the acceptance-criteria summary section."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from iphase import EnvironmentModel, reference_environment

settings.register_profile(
    "engine",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("engine")


@pytest.fixture(scope="session")
def ref_env():
    return reference_environment()


@pytest.fixture(scope="session")
def uniform_env():
    """Uniform gravity only: no gradient, no rotation, no offset."""
    return EnvironmentModel(
        gravity=(0.0, 0.0, -9.8),
        gradient=np.zeros((3, 3)),
        omega=(0.0, 0.0, 0.0),
        earth_offset=(0.0, 0.0, 0.0),
    )


@pytest.fixture(scope="session")
def zero_env():
    """Free space: every field off."""
    return EnvironmentModel(
        gravity=(0.0, 0.0, 0.0),
        gradient=np.zeros((3, 3)),
        omega=(0.0, 0.0, 0.0),
        earth_offset=(0.0, 0.0, 0.0),
    )


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    lines = getattr(pytestconfig, "_acceptance_lines", None)
    if lines is None:
        lines = []
        pytestconfig._acceptance_lines = lines
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

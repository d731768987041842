import pytest

from lanefree.config import SimConfig
from lanefree.sim import run_simulation


@pytest.fixture
def default_config() -> SimConfig:
    return SimConfig()


@pytest.fixture
def params(default_config):
    return default_config.controller_params()


@pytest.fixture(scope="session")
def baseline_run():
    """The default ten-vehicle, 340 s reference run, shared across tests."""
    return run_simulation(SimConfig())

import math

import pytest

from floathil.cli import CONFIG_DIR
from floathil.config import load_config
from floathil.farmmodel import DEFAULT_COMPONENTS, REFERENCE_TARGETS, PlatformDesign, calibrate_platform
from floathil.scenarios import build_farm


@pytest.fixture(scope="session")
def platform():
    return calibrate_platform(PlatformDesign(DEFAULT_COMPONENTS), REFERENCE_TARGETS)


@pytest.fixture(scope="session")
def farm():
    return build_farm(load_config(CONFIG_DIR / "steady-wind.yaml"))


@pytest.fixture(scope="session")
def wt1(farm):
    return farm.params[0]


@pytest.fixture(scope="session")
def wt2(farm):
    return farm.params[1]


@pytest.fixture(scope="session")
def truth(farm):
    return farm.plant_truth[0]


@pytest.fixture
def shipped():
    def _load(name, **overrides):
        return load_config(CONFIG_DIR / f"{name}.yaml", overrides or None)
    return _load


def deg(rad):
    return math.degrees(rad)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

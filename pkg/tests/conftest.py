import pytest

from ecodrive.route import builtin_route
from ecodrive.vehicle import TruckConfig

KMH = 1.0 / 3.6


@pytest.fixture(scope="session")
def cfg():
    return TruckConfig()


@pytest.fixture(scope="session")
def route():
    return builtin_route()


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

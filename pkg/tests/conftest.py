import pytest

from pushsafe.model import VehicleParams
from pushsafe.safety import calibrate_limits

# Filled by tests/test_acceptance.py; echoed at the end of the session.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def limits(params):
    return calibrate_limits(params)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

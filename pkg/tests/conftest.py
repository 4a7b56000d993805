import math

import pytest

from perfclass.dist import ContinuousDist
from perfclass.model import make_signal_model, example_environment

ACCEPTANCE_LINES = []


def Phi(z):
    """Standard normal CDF from math.erfc; independent of the scipy path."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@pytest.fixture(scope="session")
def example_env():
    return example_environment()


@pytest.fixture(scope="session")
def unit_signal():
    return make_signal_model(ContinuousDist("gaussian", 0.0, 1.0), ContinuousDist("gaussian", 1.0, 1.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

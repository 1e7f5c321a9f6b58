import numpy as np
import pytest

from barronlab.measures import random_measure

CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def measure(rng):
    return random_measure(rng, 3, 7, canonical=False)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

from spilab import capacity, measure, spectrum

ACCEPTANCE_LINES = []

# kappa grid shared by the Poincaré sandwich and the small-kappa domination checks
PROFILE_GRID = np.concatenate([np.geomspace(1e-8, 1e-3, 11), [0.5]])


@pytest.fixture(scope="session")
def gauss():
    return measure.build_measure(measure.gaussian(), (-10.0, 10.0), 2000)


@pytest.fixture(scope="session")
def gauss_spec(gauss):
    return spectrum.low_spectrum(gauss, 14, ess_threshold=math.inf)


@pytest.fixture(scope="session")
def gauss_profile(gauss):
    return capacity.capacity_profile(gauss, PROFILE_GRID)


@pytest.fixture(scope="session")
def uniform01():
    return measure.build_measure(measure.uniform(), (0.0, 1.0), 2001)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

import math

import pytest

from nozzleshock.radial import RadialProblem

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def problem3():
    return RadialProblem.build(gamma=1.4, b0=2.5, u0=1.5, r0=1.0, r1=2.0, dim=3)


@pytest.fixture(scope="session")
def problem2():
    return RadialProblem.build(gamma=1.4, b0=2.5, u0=1.5, r0=1.0, r1=2.0, dim=2, half_angle=math.pi / 6)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

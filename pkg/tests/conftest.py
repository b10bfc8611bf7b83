import numpy as np
import pytest

from photokin.experiments import builtin_problem, reference_solution
from photokin.grid import Discretization, GridSpec
from photokin.model import validate_problem


@pytest.fixture(scope="session")
def test1():
    return validate_problem(builtin_problem("test-1"))


@pytest.fixture(scope="session")
def ref7(test1):
    return reference_solution(test1, 2.0**-7)


@pytest.fixture
def disc_factory(test1):
    def make(theta=2.0**-2, problem=None):
        p = problem or test1
        return Discretization(p, GridSpec.from_theta(p, theta))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

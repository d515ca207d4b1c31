import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blowup.funcat import FunctionSpec
from blowup.transforms import ProblemSpec

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def quad_problem(g=None, x0=1.0):
    """a = 1, b = s^2: closed-form solution 1/(1/x0 - t) without noise."""
    return ProblemSpec(x0, FunctionSpec.constant(1.0), FunctionSpec.power(1.0, 2.0), g)


def counterexample_problem():
    return ProblemSpec(1.0, FunctionSpec.exponential(1.0, -1.0), FunctionSpec.power(0.25, 3.0),
                       FunctionSpec.exponential(1.0, 1.0))


@pytest.fixture
def quad():
    return quad_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance plumbing ---------------------------------------------------------
# Acceptance tests run last so they can reuse outcomes of the property suites
# from the same session; their PASS/FAIL lines go into the terminal summary.

SESSION_OUTCOMES = {}
ACCEPTANCE_LINES = []


def pytest_collection_modifyitems(session, config, items):
    items.sort(key=lambda item: item.nodeid.startswith("tests/test_acceptance.py")
               or "test_acceptance.py" in item.nodeid.split("::")[0])


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        SESSION_OUTCOMES[report.nodeid.split("/")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

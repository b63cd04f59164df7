import pytest

from fmpomdp.envs import make_fj_counterexample
from fmpomdp.model import Policy

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def ce():
    return make_fj_counterexample()


@pytest.fixture(scope="session")
def ce_pol(ce):
    return Policy.uniform(ce)


@pytest.fixture(scope="session")
def observed():
    return make_fj_counterexample(1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import settings

from roughheston.validation import DESK_HAWKES, PAPER_PARAMS

settings.register_profile("repo", max_examples=40, deadline=None)
settings.load_profile("repo")


@pytest.fixture
def paper_params():
    return PAPER_PARAMS


@pytest.fixture
def desk_hawkes():
    return DESK_HAWKES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion_log():
    return CRITERION_LINES


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

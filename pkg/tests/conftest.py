import numpy as np
import pytest

from chevron.core import ChevronParams, Grid2D, SimState


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return Grid2D(12, 10, 1.0, 1.3)


@pytest.fixture
def demo_params():
    return ChevronParams(tau=1.0, D1=1.0, D2=0.5, c1=0.5, c2=1.0, h=0.5, beta=0.5)


from helpers import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

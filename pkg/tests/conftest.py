import numpy as np
import pytest

from fosynth import reference
from fosynth.synthesis import SynthesisOptions, augment, build_selectors, synthesize

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def worked():
    return reference.worked_plant()


@pytest.fixture(scope="session")
def worked_aug(worked):
    return augment(worked, 2)


@pytest.fixture(scope="session")
def worked_sel(worked, worked_aug):
    return build_selectors(worked, worked_aug)


@pytest.fixture(scope="session")
def published():
    return reference.published_controller()


@pytest.fixture(scope="session")
def demo():
    return reference.demo_plant()


@pytest.fixture(scope="session")
def demo_design(demo):
    return synthesize(demo, 2, SynthesisOptions())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

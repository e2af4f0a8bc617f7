import numpy as np
import pytest

import alloysim as al

# registry for the acceptance table printed at the end of the session
ACCEPTANCE_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number:2d}: {detail}")


@pytest.fixture
def uniform01():
    return al.CouplingMeasure.uniform(0.0, 1.0)


@pytest.fixture
def gaussian01():
    return al.CouplingMeasure.gaussian(0.0, 1.0)


@pytest.fixture
def cosine01():
    return al.CouplingMeasure.cosine(0.0, 1.0)


@pytest.fixture
def two_tap():
    return al.build_single_site(1, {(0,): 1.0, (1,): 1.0})


@pytest.fixture
def delta_profile():
    return al.build_single_site(1, {(0,): 1.0})


@pytest.fixture
def flagship_model(two_tap, uniform01):
    return al.AlloyModel(two_tap, uniform01, 1.0)


@pytest.fixture
def anderson_gaussian(delta_profile, gaussian01):
    return al.AlloyModel(delta_profile, gaussian01, 10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)

import numpy as np
import pytest

from lielinear.descriptor import fixture, random_sl2_system

ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def example1():
    return fixture("sl2_unipotent")


@pytest.fixture(scope="session")
def example2():
    return fixture("sl2_trig_corrected")


@pytest.fixture(scope="session")
def example2_printed():
    return fixture("sl2_trig_printed")


@pytest.fixture(scope="session")
def hyperbolic():
    return fixture("sl2_hyperbolic")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def random_systems():
    rng = np.random.default_rng(7)
    return [random_sl2_system(rng) for _ in range(40)]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, line = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"AC{key[0]}: {'PASS' if ok else 'FAIL'}  {line}")

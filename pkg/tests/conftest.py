import numpy as np
import pytest

from unruh_lab.oscillatory import Regularization
from unruh_lab.trajectory import make_piecewise_alpha


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def family():
    return make_piecewise_alpha(1.0, 2.0, 1.5, 1.0, 3.0, 1.0)


@pytest.fixture
def rest():
    return make_piecewise_alpha(1.0, 1.0, 1.0, 1.0, 2.0, 1.0)


def adiabatic(eps):
    return Regularization.adiabatic(eps)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)

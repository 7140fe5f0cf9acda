import math

import numpy as np
import pytest

from h2wkit import StateSpaceModel


def lag_sq(omega):
    """Closed form of the band norm of 1/(s+1) over [0, omega]."""
    return math.atan(omega) / math.pi


def osc_sq(omega):
    """Closed form of the band norm of 1/(s^2+1) over [0, omega], omega < 1.

    From the antiderivative v/(2(1-v^2)) + ln((1+v)/(1-v))/4 of 1/(1-v^2)^2.
    """
    F = omega / (2 * (1 - omega ** 2)) + 0.25 * math.log((1 + omega) / (1 - omega))
    return F / math.pi


@pytest.fixture
def lag1():
    return StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]], name='lag1')


@pytest.fixture
def osc():
    return StateSpaceModel([[0.0, 1.0], [-1.0, 0.0]], [[0.0], [1.0]],
                           [[1.0, 0.0]], name='osc')


@pytest.fixture
def two_pole():
    return StateSpaceModel(np.diag([-1.0, -2.0]), [[1.0], [1.0]], [[1.0, 1.0]])


@pytest.fixture
def antilag():
    return StateSpaceModel([[1.0]], [[1.0]], [[1.0]])


@pytest.fixture
def gain2():
    return StateSpaceModel([[-1.0]], [[0.0]], [[0.0]], [[2.0]])


# -- acceptance reporting ----------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line(
        'markers', 'acceptance(number, title): exit criterion of the build')


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker('acceptance')
    if mark is None or rep.when != 'call' and not rep.failed:
        return
    number, title = mark.args
    ok = rep.passed if rep.when == 'call' else False
    prev = _ACCEPTANCE.get(number, (title, True))
    _ACCEPTANCE[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hrtlab import window as W

settings.register_profile("ci", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def gauss():
    return W.gaussian()


@pytest.fixture(scope="session")
def expw():
    return W.two_sided_exp()


@pytest.fixture(scope="session")
def ratw():
    return W.rational()


@pytest.fixture(scope="session")
def bump():
    """A smooth compactly sampled real window."""
    t = np.linspace(-2, 2, 81)
    return W.sampled(-2.0, 0.05, np.cos(math.pi * t / 4) ** 4)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

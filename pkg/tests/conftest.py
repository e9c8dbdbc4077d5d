import numpy as np
import pytest

from sparsetf.synthetic import chirp_frequency


def interior(t):
    return (t >= 0.05) & (t <= 0.95)


def if_error(freq_hz, t, truth=None):
    """Relative l2 error of an IF estimate over the interior of [0, 1]."""
    truth = chirp_frequency(t) if truth is None else truth
    sel = interior(t)
    return float(np.linalg.norm((freq_hz - truth)[sel]) / np.linalg.norm(truth[sel]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

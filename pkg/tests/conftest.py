import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

TWO_PI_SQ = 2.0 * np.pi**2


def make_random_loop():
    """Fixed random 3-harmonic plane loop, close enough to a circle to stay simple."""
    from curvn.curves import FourierLoop

    rng = np.random.default_rng(20240607)
    a = np.array([[1.0, 0.0], *(0.04 * rng.standard_normal((2, 2)))])
    b = np.array([[0.0, 1.0], *(0.04 * rng.standard_normal((2, 2)))])
    return FourierLoop(a, b)


@pytest.fixture
def random_loop():
    return make_random_loop()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

import sys
import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def random_points(rng, n, lo=-2.0, hi=2.0):
    return rng.uniform(lo, hi, n) + 1j * rng.uniform(lo, hi, n)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

from smpath.models import ModelKind, SMModelSpec

TWO_PI = 2 * math.pi


@pytest.fixture
def lebesgue_2pi():
    return SMModelSpec(ModelKind.LEBESGUE, T=TWO_PI)


@pytest.fixture
def wiener_2pi():
    return SMModelSpec(ModelKind.WIENER, T=TWO_PI)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """record(number, ok, detail): print a pass/fail line and collect it for the summary."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.stash[_RESULTS].append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_RESULTS]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)

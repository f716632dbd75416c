import numpy as np
import pytest

from mhessian import kernels


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    monkeypatch.setattr(kernels, "_active", kernels.backends()[request.param])
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

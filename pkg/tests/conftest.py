import numpy as np
import pytest

from qcvselect import _backend

ACCEPTANCE_LINES = []


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    previous = _backend.name()
    _backend.use(request.param)
    yield request.param
    _backend.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_state(rng, q):
    a = rng.normal(size=1 << q) + 1j * rng.normal(size=1 << q)
    return a / np.linalg.norm(a)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

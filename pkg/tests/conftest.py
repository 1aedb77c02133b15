import numpy as np
import pytest

from tgcntrack import kernels
from tgcntrack.core import BoundingBox

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = kernels.available_backends()[request.param]
    monkeypatch.setattr(kernels, "_impl", impl)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def box(x, y, w, h):
    return BoundingBox(float(x), float(y), float(w), float(h))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

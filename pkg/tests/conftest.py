import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qcap", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("qcap")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def cmat(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def herm(rng, n):
    A = cmat(rng, n, n)
    return A + A.conj().T


# one PASS/FAIL line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

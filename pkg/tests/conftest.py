import numpy as np
import pytest

from raman_qmem.modes import ModeCache, decompose, set_default_cache
from raman_qmem.physical import gaussian_wavepacket

# keep test runs away from the user's cache directory
set_default_cache(ModeCache(None))


@pytest.fixture(scope="session")
def d2():
    return decompose(2.0, 500, 5)


@pytest.fixture(scope="session")
def ref_signal():
    return gaussian_wavepacket(1 / 8, 2 / 3, 1.0, 2001)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

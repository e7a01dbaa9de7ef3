import numpy as np
import pytest

from fluxlru.hilbert import DeviceParams


@pytest.fixture(scope="session")
def qubit_a():
    return DeviceParams.qubit_a()


@pytest.fixture(scope="session")
def small_device(qubit_a):
    """Reduced truncation of qubit A for quick property checks."""
    return qubit_a.with_(n_transmon=4, n_res=3, n_filt=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])

# conftest.py
import numpy as np
import pytest

from spectriple.core.catalog import electrodynamics_triple
from spectriple.core.clifford import build_gammas, charge_conjugation


def pytest_addoption(parser):
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="Run the full certification grids"
    )


def pytest_configure(config):
    # --slow runs everything, including what pytest.ini deselects
    if config.getoption("--slow"):
        config.option.markexpr = ""


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def gammas():
    return build_gammas()


@pytest.fixture(scope="session")
def jm(gammas):
    return charge_conjugation(gammas)


@pytest.fixture
def fed():
    """Electrodynamics triple with d = -i."""
    return electrodynamics_triple(d=-1j)

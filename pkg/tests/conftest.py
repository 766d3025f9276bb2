import numpy as np
import pytest

import btq

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sphere():
    return btq.KahlerModel.sphere()


@pytest.fixture(scope="session")
def torus():
    return btq.KahlerModel.torus(1j)


@pytest.fixture(scope="session")
def atoms(sphere):
    return tuple(btq.sphere_atom(sphere, i) for i in (1, 2, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sphere_points(rng, n, rmax=3.0):
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

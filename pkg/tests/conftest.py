import cmath
import math

import numpy as np
import pytest

from idealpoints.deformation import EquationSystem
from idealpoints.triangulation import load_triangulation

# frozen oracles for the bundled m137 file
P0 = np.array([0.5 + 0.5j, 1 + 1j, 0.5 + 0.5j, 1 + 1j])
ZETA = cmath.exp(1j * math.pi / 6) / math.sqrt(3)
P_IDEAL = np.array([ZETA, 1, 1, 0], dtype=complex)
M137_VOLUME = 3.6638623767088  # sum of Bloch-Wigner values at P0, checked against mpmath
OMEGA3 = cmath.exp(2j * math.pi / 3)


@pytest.fixture(scope="session")
def m137():
    return load_triangulation("m137")


@pytest.fixture(scope="session")
def explicit(m137):
    return EquationSystem.from_triangulation(m137, "explicit")


@pytest.fixture(scope="session")
def derived(m137):
    return EquationSystem.from_triangulation(m137, "derived")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

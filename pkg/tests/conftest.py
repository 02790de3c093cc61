import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thetaquant import SiegelPoint


@pytest.fixture(scope="session")
def points_n1():
    """The standard n = 1 test points: i, 1+2i, 0.5+0.7i."""
    return [SiegelPoint(1j), SiegelPoint(1 + 2j), SiegelPoint(0.5 + 0.7j)]


@pytest.fixture(scope="session")
def point_n2():
    return SiegelPoint(np.diag([1j, 2j]))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)

import numpy as np
import pytest

from core.bump import BumpProfile
from core.data import DataSpec, make_bump_pair
from core.grid import Grid1D
from core.lab import Lab
from core.profile import AsymptoticProfile


@pytest.fixture(scope="session")
def pair() -> BumpProfile:
    """The default asymmetric pair (h2, h3) with C = 1."""
    return make_bump_pair(1.0)


@pytest.fixture(scope="session")
def spec3() -> DataSpec:
    return DataSpec.canonical(1.0, 0.3, 3)


@pytest.fixture(scope="session")
def spec2() -> DataSpec:
    return DataSpec.canonical(1.0, 0.3, 2)


@pytest.fixture
def lab() -> Lab:
    lab = Lab()
    lab.load_groups()
    return lab


def rotating_profile(angle: float, C: float = 1.0, n: int = 129) -> AsymptoticProfile:
    """
    A hand-made profile whose strips turn e1 into ``(cos a, sin a, 0)``.

    ``|alpha - e1| = 2 sin(a / 2)`` is far from zero, which makes the
    logarithmic growth visible at modest T.
    """
    grid = Grid1D(-C, C, n)
    s = grid.nodes / C
    step = np.where(np.abs(s) < 1.0, 0.5 + 0.75 * s - 0.25 * s**3, (s > 0).astype(float))
    theta = angle * step
    F = np.column_stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)])
    alpha = np.array([np.cos(angle), np.sin(angle), 0.0])
    return AsymptoticProfile(C, grid, F, F.copy(), alpha, 0.0, 4.0 * C)


@pytest.fixture
def big_profile() -> AsymptoticProfile:
    return rotating_profile(0.5)

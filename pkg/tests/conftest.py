from pathlib import Path

import pytest

from bates_adi import assemble, build_grid, payoff_vector
from bates_adi.cases import CASES

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def ref_cache_dir() -> Path:
    """Disk cache shared by all tests so reference solutions persist."""
    path = REPO_ROOT / ".refcache"
    path.mkdir(exist_ok=True)
    return path


@pytest.fixture(scope="session")
def case1_params():
    return CASES["I"]


@pytest.fixture(scope="session")
def small_setup(case1_params):
    """Case I on a coarse grid: (grid, ops, payoff)."""
    grid = build_grid(case1_params, 40, 20)
    ops = assemble(grid, case1_params)
    return grid, ops, payoff_vector(grid, case1_params)

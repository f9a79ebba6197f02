import numpy as np
import pytest

from hjplatoon import (
    ActuationBounds,
    ConstraintBox,
    DisturbanceModel,
    Grid,
    IdmParams,
    SolverSettings,
    solve,
)


@pytest.fixture(scope="session")
def bounds():
    return ActuationBounds()


@pytest.fixture(scope="session")
def box():
    return ConstraintBox()


@pytest.fixture(scope="session")
def finite_box():
    return ConstraintBox(x_lo=0.0, x_hi=40.0, v_lo=-10.0, v_hi=10.0)


@pytest.fixture(scope="session")
def idm_params():
    return IdmParams()


@pytest.fixture(scope="session")
def grid2d_small():
    return Grid(lo=[-4.0, -12.0], hi=[44.0, 12.0], shape=(81, 81))


@pytest.fixture(scope="session")
def field2d(grid2d_small, box, bounds):
    """Converged 2D field on a small grid, shared by query/sim tests."""
    result = solve(grid2d_small, box, DisturbanceModel.extreme(), bounds,
                   SolverSettings())
    assert result.converged
    return result.field


def random_field(grid, rng, lo=-5.0, hi=5.0):
    from hjplatoon import ValueField

    values = rng.uniform(lo, hi, size=grid.shape)
    return ValueField(grid, values, tau=0.0, iterations=0)

import pytest

from cmaeig.domain import profile_ball
from cmaeig.radial import solve_lambda
from cmaeig.solver2d import inverse_iteration


@pytest.fixture(scope="session")
def radial_unit():
    return solve_lambda(1.0)


@pytest.fixture(scope="session")
def ball_33():
    return inverse_iteration(profile_ball(1.0), 33)


@pytest.fixture(scope="session")
def ball_65():
    return inverse_iteration(profile_ball(1.0), 65)

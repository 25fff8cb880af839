import os

import pytest
from hypothesis import HealthCheck, settings

from lagset.plant import parse_plant
from lagset.polytope import from_vertices

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("LAGSET_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def swap_plant():
    """n = (0, 1, 0), d = (1, 0, -1): A and A* both swap the coordinates."""
    return parse_plant((0, 1, 0), (1, 0, -1))


@pytest.fixture
def square():
    return from_vertices([(1, 1), (-1, 1), (-1, -1), (1, -1)])


@pytest.fixture
def diamond():
    return from_vertices([(1, 0), (0, 1), (-1, 0), (0, -1)])

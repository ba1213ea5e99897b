import numpy as np
import pytest

from app.core.config import settings
from app.envs.maps import make_four_rooms, make_reach3d, make_trap
from app.schemas.env import EnvSpec


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch):
    monkeypatch.setattr(settings, "PROGRESS_BAR", False)


@pytest.fixture(scope="session")
def four_rooms():
    return make_four_rooms()


@pytest.fixture(scope="session")
def trap():
    return make_trap()


@pytest.fixture
def reach3d():
    return make_reach3d()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def chain_spec(states: int) -> EnvSpec:
    """One-hot chain: each state is a unit vector, so a linear critic is a table."""
    return EnvSpec(
        name="chain", state_dim=states, action_dim=1,
        action_low=[-1.0], action_high=[1.0],
        observation_low=[0.0] * states, observation_high=[1.0] * states,
        goal_radius=0.5, step_scale=1.0,
    )


def sight_penalized_bfs(env, penalty: float = 2.0):
    """
    Hop count, multiplied by ``penalty`` when the straight segment is blocked.
    Not a metric, so bridges through doorways can satisfy the acceptance test.
    """
    hops = env.bfs_distance_fn()

    def distance(starts, goals):
        starts, goals = np.atleast_2d(starts), np.atleast_2d(goals)
        base = hops(starts, goals)
        sight = np.array([env.line_of_sight(s, g) for s, g in zip(starts, goals)])
        return np.where(sight, base, penalty * base)
    return distance

import math

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError, ContractViolationError, UnsupportedOperationError
from app.envs.base import EnvState, PointEnv
from app.envs.maps import TRAP_GOAL, TRAP_START, calibrate, make_env, parse_map
from app.schemas.env import EnvSpec, Wall


def box_with_divider() -> PointEnv:
    spec = EnvSpec(name="divided", state_dim=2, action_dim=2, action_low=[-1, -1], action_high=[1, 1],
                   observation_low=[0, 0], observation_high=[10, 10], goal_radius=1.5, step_scale=1.0)
    return PointEnv(spec, [Wall(x_min=4, y_min=0, x_max=5, y_max=10)])


@pytest.mark.parametrize("name, expected", [("four_rooms", 120), ("city", 244), ("city_desk", 119)])
def test_max_bfs_distance(name, expected):
    assert calibrate(name).max_bfs_distance == expected


def test_trap_hop_counts(trap):
    report = calibrate("trap")
    assert report.start_to_trap == 8
    assert report.start_to_goal == 84
    state = trap.reset(None)
    assert trap.cell_of(state.position) == TRAP_START
    assert trap.cell_of(state.goal) == TRAP_GOAL


def test_random_walk_never_enters_walls(four_rooms):
    rng = np.random.default_rng(5)
    state = four_rooms.reset(rng)
    for _ in range(20_000):
        state, _ = four_rooms.step(state, rng.uniform(-1, 1, size=2))
        assert four_rooms.is_free(state.position)


def test_blocked_axis_slides_along_wall(four_rooms):
    state = EnvState(position=np.array([29.5, 5.5]), goal=np.array([50.0, 5.5]))
    moved, reached = four_rooms.step(state, np.array([1.0, 1.0]))
    np.testing.assert_allclose(moved.position, [29.5, 6.5])
    assert not reached
    assert moved.steps_taken == 1


def test_actions_are_clipped(four_rooms):
    state = EnvState(position=np.array([5.5, 5.5]), goal=np.array([50.0, 50.0]))
    moved, _ = four_rooms.step(state, np.array([9.0, -9.0]))
    np.testing.assert_allclose(moved.position, [6.5, 4.5])


def test_goal_radius_is_inclusive(four_rooms):
    state = EnvState(position=np.array([5.0, 5.0]), goal=np.array([7.5, 5.0]))
    _, reached = four_rooms.step(state, np.array([1.0, 0.0]))
    assert reached


def test_reset_samples_distinct_free_positions(four_rooms, rng):
    for _ in range(200):
        state = four_rooms.reset(rng)
        assert four_rooms.is_free(state.position) and four_rooms.is_free(state.goal)
        assert not np.array_equal(state.position, state.goal)


def test_unreachable_and_wall_cells():
    env = box_with_divider()
    assert env.bfs_distance((0, 0), (9, 9)) == math.inf
    assert env.bfs_distance((0, 0), (3, 9)) == 12
    with pytest.raises(ContractViolationError):
        env.bfs_distance((0, 0), (4, 4))


def test_cells_at_distance_matches_bfs(four_rooms):
    grid = four_rooms.grid
    for cell in grid.cells_at_distance((5, 5), 19, 21)[:50]:
        assert 19 <= four_rooms.bfs_distance((5, 5), cell) <= 21


def test_line_of_sight(four_rooms):
    assert four_rooms.line_of_sight([5.5, 5.5], [20.5, 20.5])
    assert not four_rooms.line_of_sight([5.5, 5.5], [55.5, 55.5])
    assert four_rooms.line_of_sight([5.5, 5.5], [30.5, 14.5])


def test_reach3d_has_no_grid(reach3d, rng):
    with pytest.raises(UnsupportedOperationError):
        reach3d.bfs_distance((0, 0), (1, 1))
    state = EnvState(position=np.array([0.95, 0.0, -0.95]), goal=np.zeros(3))
    moved, _ = reach3d.step(state, np.array([1.0, 1.0, -1.0]))
    np.testing.assert_allclose(moved.position, [1.0, 0.1, -1.0])
    assert reach3d.analytic_distance(moved.position, np.zeros(3)) == pytest.approx(np.sqrt(2.01))


def test_walls_need_two_dimensions(reach3d):
    with pytest.raises(ConfigurationError):
        PointEnv(reach3d.spec, [Wall(x_min=0, y_min=0, x_max=1, y_max=1)])


def test_map_parsing_errors():
    with pytest.raises(ConfigurationError):
        parse_map("0 0 10 10\n3 3 3 8\n")
    with pytest.raises(ConfigurationError):
        parse_map("0 0 10 ten\n")
    with pytest.raises(ConfigurationError):
        parse_map("# only a comment\n")
    low, high, walls = parse_map("0 0 10 10  # bounds\n\n1 1 2 2\n")
    assert (low, high, len(walls)) == ([0.0, 0.0], [10.0, 10.0], 1)


def test_unknown_environment():
    with pytest.raises(ConfigurationError):
        make_env("moon_base")


def test_fixed_task_reset(four_rooms):
    state = four_rooms.reset(None, task=([5.5, 5.5], [55.5, 55.5]))
    np.testing.assert_array_equal(state.position, [5.5, 5.5])
    np.testing.assert_array_equal(state.goal, [55.5, 55.5])
    assert state.steps_taken == 0


def test_city_resets_stay_out_of_walls():
    city = make_env("city")
    rng = np.random.default_rng(12)
    for _ in range(10_000):
        state = city.reset(rng)
        assert city.is_free(state.position)


def test_zero_action_and_straight_walk(four_rooms):
    state = EnvState(position=np.array([5.5, 5.5]), goal=np.array([55.5, 55.5]))
    still, reached = four_rooms.step(state, np.zeros(2))
    np.testing.assert_array_equal(still.position, state.position)
    assert not reached
    for _ in range(10):
        state, _ = four_rooms.step(state, np.array([1.0, 0.0]))
    np.testing.assert_allclose(state.position, [15.5, 5.5])


@pytest.mark.parametrize("env_name, origin", [("four_rooms", [15.0, 15.0]), ("reach3d", [0.0, 0.0, 0.0])])
def test_open_space_moves_are_reversible(env_name, origin):
    env = make_env(env_name)
    rng = np.random.default_rng(13)
    for _ in range(100):
        action = rng.uniform(-1, 1, size=env.spec.action_dim)
        state = EnvState(position=np.array(origin), goal=np.array(origin))
        there, _ = env.step(state, action)
        back, _ = env.step(there, -action)
        np.testing.assert_allclose(back.position, origin, atol=1e-6)


def flood_fill(free: np.ndarray, source) -> dict:
    hops = {tuple(source): 0}
    frontier = [tuple(source)]
    while frontier:
        following = []
        for x, y in frontier:
            for u, v in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if 0 <= u < free.shape[0] and 0 <= v < free.shape[1] and free[u, v] and (u, v) not in hops:
                    hops[(u, v)] = hops[(x, y)] + 1
                    following.append((u, v))
        frontier = following
    return hops


def test_bfs_hop_counts(four_rooms):
    start, goal = four_rooms.cell_of([5.5, 5.5]), four_rooms.cell_of([55.5, 55.5])
    assert four_rooms.bfs_distance(start, start) == 0
    assert four_rooms.bfs_distance(start, (start[0] + 1, start[1])) == 1
    assert four_rooms.bfs_distance(start, goal) == flood_fill(four_rooms.grid.free, start)[goal]


@pytest.mark.parametrize("env_name", ["four_rooms", "trap"])
def test_bfs_is_symmetric_and_triangular(env_name):
    env = make_env(env_name)
    free = env.grid.free_cells()
    picks = free[np.random.default_rng(14).choice(len(free), size=12, replace=False)]
    cells = [(int(x), int(y)) for x, y in picks]
    hops = np.array([[env.bfs_distance(a, b) for b in cells] for a in cells])
    np.testing.assert_array_equal(hops, hops.T)
    assert np.all(hops[:, None, :] <= hops[:, :, None] + hops[None, :, :])


@pytest.mark.slow
@pytest.mark.parametrize("env_name", ["four_rooms", "trap"])
def test_million_random_steps_never_enter_walls(env_name):
    env = make_env(env_name)
    rng = np.random.default_rng(19)
    actions = rng.uniform(-1, 1, size=(1_000_000, 2))
    state = env.reset(rng)
    escaped = 0
    for action in actions:
        state, _ = env.step(state, action)
        escaped += not env.is_free(state.position)
    assert escaped == 0

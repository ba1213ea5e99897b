import numpy as np
import pytest

from conftest import sight_penalized_bfs

from app.AI.gdg import EuclideanDistance
from app.AI.planner import CandidateSource, WaypointSelector, plan_waypoints, search_bridge, waypoint_policy
from app.core.exceptions import PreconditionError
from app.schemas.plan import BridgePlan, PlanSource

START = [5.5, 5.5]
GOAL = [55.5, 55.5]
LOWER_DOOR = [30.5, 14.5]
UPPER_DOOR = [45.5, 30.5]
FAR_CORNER = [55.5, 5.5]


def test_doorway_bridge_is_accepted(four_rooms, rng):
    distance = sight_penalized_bfs(four_rooms)
    candidates = CandidateSource.from_points([FAR_CORNER, LOWER_DOOR, UPPER_DOOR])
    plan = search_bridge(distance, START, GOAL, candidates, rng)
    assert plan.source == PlanSource.FOUND
    assert plan.waypoints == [LOWER_DOOR]
    assert plan.candidates_evaluated == 2
    record = plan.accepted[0]
    assert (record.d_start_goal, record.d_start_bridge, record.d_bridge_goal) == (200.0, 34.0, 132.0)
    assert record.satisfied()


def test_hop_count_metric_never_admits_a_bridge(four_rooms, rng):
    candidates = CandidateSource.from_points([FAR_CORNER, LOWER_DOOR, UPPER_DOOR])
    plan = search_bridge(four_rooms.bfs_distance_fn(), START, GOAL, candidates, rng)
    assert plan.source == PlanSource.SEARCH_EXHAUSTED
    assert plan.waypoints == []


def test_short_task_keeps_the_direct_goal(four_rooms, rng):
    distance = sight_penalized_bfs(four_rooms)
    plan = search_bridge(distance, START, [10.5, 10.5], CandidateSource.from_env(four_rooms, 64), rng)
    assert not plan.found
    assert plan.candidates_evaluated == 64


def test_empty_candidate_budget(four_rooms, rng):
    plan = search_bridge(sight_penalized_bfs(four_rooms), START, GOAL, CandidateSource.from_env(four_rooms, 0), rng)
    assert plan.source == PlanSource.SEARCH_EXHAUSTED
    assert plan.candidates_evaluated == 0


def test_recursive_plan_is_in_traversal_order(four_rooms, rng):
    distance = sight_penalized_bfs(four_rooms)
    candidates = CandidateSource.from_points([LOWER_DOOR, UPPER_DOOR, FAR_CORNER])
    plan = plan_waypoints(distance, START, GOAL, 2, candidates, rng)
    assert plan.waypoints == [LOWER_DOOR, UPPER_DOOR]
    assert all(record.satisfied() for record in plan.accepted)
    single = plan_waypoints(distance, START, GOAL, 1, candidates, rng)
    assert single.waypoints == [LOWER_DOOR]
    with pytest.raises(PreconditionError):
        plan_waypoints(distance, START, GOAL, 0, candidates, rng)


def test_replay_candidates_come_from_stored_states(rng):
    class Buffer:
        def sample_states(self, count, rng):
            return np.tile([1.0, 2.0], (count, 1))

    pool = CandidateSource.from_buffer(Buffer(), 5).draw(rng)
    assert pool.shape == (5, 2)


def test_waypoint_selector_only_moves_forward():
    plan = BridgePlan(waypoints=[[1.0, 0.0], [2.0, 0.0]], source=PlanSource.FOUND)
    selector = WaypointSelector(lambda s, g: g, plan, final_goal=[5.0, 0.0], reach_radius=0.5)
    np.testing.assert_array_equal(selector([0.0, 0.0]), [1.0, 0.0])
    np.testing.assert_array_equal(selector([1.1, 0.0]), [2.0, 0.0])
    # back near the first waypoint: still heading for the second
    np.testing.assert_array_equal(selector([1.0, 0.0]), [2.0, 0.0])
    assert selector.index == 1
    np.testing.assert_array_equal(selector([2.0, 0.1]), [5.0, 0.0])
    assert selector.finished


def test_selector_skips_waypoints_reached_together():
    plan = BridgePlan(waypoints=[[1.0, 0.0], [1.2, 0.0]], source=PlanSource.FOUND)
    selector = WaypointSelector(lambda s, g: g, plan, final_goal=[5.0, 0.0], reach_radius=0.5)
    np.testing.assert_array_equal(selector.commanded_goal([1.1, 0.0]), [5.0, 0.0])
    with pytest.raises(PreconditionError):
        WaypointSelector(lambda s, g: g, plan, [5.0, 0.0], reach_radius=0.0)


def test_plan_text_form():
    plan = BridgePlan(waypoints=[[30.5, 14.5], [45.5, 30.5]], source=PlanSource.FOUND)
    assert plan.to_text() == "30.5 14.5\n45.5 30.5\n"
    assert BridgePlan.from_text(plan.to_text()).waypoints == plan.waypoints
    assert BridgePlan.from_text("").source == PlanSource.NONE_FOUND
    assert BridgePlan().source == PlanSource.NONE_FOUND


def test_euclidean_distance_never_accepts(rng):
    distance = EuclideanDistance()
    accepted = 0
    for _ in range(10):
        start, goal = rng.uniform(-1, 1, size=(2, 3))
        pool = CandidateSource.from_points(rng.uniform(-1, 1, size=(10_000, 3)))
        accepted += len(search_bridge(distance, start, goal, pool, rng, margin=1e-9).accepted)
    assert accepted == 0


def test_no_top_level_bridge_means_empty_plan_at_any_depth(four_rooms, rng):
    candidates = CandidateSource.from_points([FAR_CORNER, LOWER_DOOR, UPPER_DOOR])
    for depth in (1, 2, 3):
        plan = plan_waypoints(four_rooms.bfs_distance_fn(), START, GOAL, depth, candidates, rng)
        assert plan.waypoints == [] and not plan.found


def test_empty_plan_always_commands_the_final_goal():
    selector = WaypointSelector(lambda s, g: g, BridgePlan(), final_goal=[5.0, 0.0], reach_radius=0.5)
    for state in ([0.0, 0.0], [5.0, 0.0], [-3.0, 2.0]):
        np.testing.assert_array_equal(selector(state), [5.0, 0.0])
    assert selector.finished


def test_waypoint_policy_queries_actor_with_commanded_goal():
    queried = []

    def actor(s, g):
        queried.append(np.asarray(g).tolist())
        return np.zeros(2)

    plan = BridgePlan(waypoints=[[30.5, 14.5]], source=PlanSource.FOUND)
    steer = waypoint_policy(actor, plan, final_goal=[55.5, 55.5], reach_radius=1.5)
    steer([5.5, 5.5])
    steer([30.5, 14.5])
    steer([31.0, 15.0])
    assert queried == [[30.5, 14.5], [55.5, 55.5], [55.5, 55.5]]

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
from scipy.stats import spearmanr

from app.AI.planner.bridge import CandidateSource, plan_waypoints
from app.AI.planner.waypoints import WaypointSelector
from app.AI.policy import GoalPolicy
from app.core.exceptions import PreconditionError
from app.envs.base import PointEnv, Task
from app.schemas.config import PlannerConfig
from app.schemas.plan import BridgePlan
from app.schemas.report import BucketRow, BucketSummary, BucketTable, TaskOutcome

logger = logging.getLogger(__name__)

StepPolicy = Callable[[np.ndarray], np.ndarray]

BUCKET_TOLERANCE = 0.05
BUCKET_ATTEMPTS_PER_TASK = 50


class EpisodePolicy(Protocol):
    def start(self, start: np.ndarray, goal: np.ndarray) -> StepPolicy: ...


class GoalConditionedPolicy:
    def __init__(self, policy: GoalPolicy):
        self.policy = policy

    def start(self, start, goal) -> StepPolicy:
        return lambda s: self.policy(s, goal)


class BridgingPolicy:
    """Plans bridge waypoints at task start and steers the actor through them."""

    def __init__(self, policy: GoalPolicy, distance, candidates: CandidateSource, planner: PlannerConfig,
                 reach_radius: float, rng: np.random.Generator):
        self.policy = policy
        self.distance = distance
        self.candidates = candidates
        self.planner = planner
        self.reach_radius = reach_radius
        self.rng = rng
        self.plans: List[BridgePlan] = []

    def plan(self, start, goal) -> BridgePlan:
        return plan_waypoints(self.distance, start, goal, self.planner.depth, self.candidates, self.rng,
                              self.planner.margin)

    def start(self, start, goal) -> StepPolicy:
        plan = self.plan(start, goal)
        self.plans.append(plan)
        return WaypointSelector(self.policy, plan, goal, self.reach_radius)


def as_episode_policy(policy) -> EpisodePolicy:
    return policy if hasattr(policy, "start") else GoalConditionedPolicy(policy)


@dataclass
class EvalSlice:
    success_rate: float
    mean_final_distance: float
    successes: int
    outcomes: List[TaskOutcome]
    trajectories: List[np.ndarray] = field(default_factory=list)


def sample_tasks(env: PointEnv, count: int, rng: np.random.Generator) -> List[Task]:
    tasks = []
    for _ in range(count):
        state = env.reset(rng)
        tasks.append((state.position, state.goal))
    return tasks


def rollout(env: PointEnv, step_policy: StepPolicy, task: Task, budget: int) -> Tuple[TaskOutcome, np.ndarray]:
    state = env.reset(None, task=task)
    positions = [state.position]
    reached = env.goal_reached(state.position, state.goal)
    while not reached and state.steps_taken < budget:
        state, reached = env.step(state, step_policy(state.position))
        positions.append(state.position)
    outcome = TaskOutcome(
        start=np.asarray(task[0]).tolist(), goal=np.asarray(task[1]).tolist(), success=bool(reached),
        steps=state.steps_taken, final_distance=env.distance_to_goal(state.position, state.goal),
    )
    return outcome, np.array(positions)


def evaluate(policy, env: PointEnv, tasks: Union[Sequence[Task], Callable[[], Sequence[Task]]],
             budget: int, record_trajectories: bool = False) -> EvalSlice:
    """
    Greedy evaluation: a task succeeds when the goal radius is entered within
    ``budget`` steps (a start already inside it succeeds with 0 steps).
    """
    if budget < 1:
        raise PreconditionError("Evaluation budget must be at least 1")
    tasks = list(tasks() if callable(tasks) else tasks)
    if not tasks:
        raise PreconditionError("Evaluation needs at least one task")
    episode_policy = as_episode_policy(policy)
    outcomes, trajectories = [], []
    for task in tasks:
        outcome, path = rollout(env, episode_policy.start(np.asarray(task[0]), np.asarray(task[1])), task, budget)
        outcomes.append(outcome)
        if record_trajectories:
            trajectories.append(path)
    successes = sum(o.success for o in outcomes)
    return EvalSlice(
        success_rate=successes / len(tasks),
        mean_final_distance=float(np.mean([o.final_distance for o in outcomes])),
        successes=successes,
        outcomes=outcomes,
        trajectories=trajectories,
    )


def sample_tasks_at_distance(env: PointEnv, distance: int, count: int, rng: np.random.Generator,
                             tolerance: float = BUCKET_TOLERANCE) -> List[Task]:
    """Start/goal cell centres whose BFS distance is within ±tolerance of ``distance``."""
    grid = env.require_grid()
    free = grid.free_cells()
    low, high = distance * (1.0 - tolerance), distance * (1.0 + tolerance)
    tasks: List[Task] = []
    for _ in range(count * BUCKET_ATTEMPTS_PER_TASK):
        if len(tasks) == count:
            break
        start = tuple(int(v) for v in free[rng.integers(len(free))])
        hits = grid.cells_at_distance(start, low, high)
        if hits:
            goal = hits[int(rng.integers(len(hits)))]
            tasks.append((grid.center(start), grid.center(goal)))
    return tasks


def distance_bucket_eval(policy, env: PointEnv, distances: Sequence[int], tasks_per_bucket: int,
                         seeds: Sequence[int], budget: Optional[int] = None) -> BucketTable:
    """
    Success per BFS-distance bucket and seed. ``policy`` may be one policy or a
    mapping seed -> policy (one trained agent per seed).
    """
    budget = budget or env.spec.horizon
    table = BucketTable()
    for distance in distances:
        rates = []
        for seed in seeds:
            chosen = policy[seed] if isinstance(policy, Mapping) else policy
            tasks = sample_tasks_at_distance(env, distance, tasks_per_bucket, np.random.default_rng([seed, distance]))
            if not tasks:
                logger.warning(f"⚠️ Bucket {distance} is unsatisfiable on {env.name}")
                table.rows.append(BucketRow(distance=distance, seed=seed, satisfiable=False))
                continue
            result = evaluate(chosen, env, tasks, budget)
            rates.append(result.success_rate)
            table.rows.append(BucketRow(distance=distance, seed=seed, success_rate=result.success_rate,
                                        tasks=len(tasks)))
        table.summary.append(BucketSummary(
            distance=distance, seeds=len(rates), satisfiable=bool(rates),
            mean=float(np.mean(rates)) if rates else None,
            minimum=float(np.min(rates)) if rates else None,
            maximum=float(np.max(rates)) if rates else None,
        ))
    return table


@dataclass
class DistanceCalibration:
    pairs: int
    rank_correlation: float
    mean_ratio: float
    mean_estimate: float
    mean_hops: float


def distance_calibration(distance, env: PointEnv, starts, goals) -> DistanceCalibration:
    """
    Compares a distance estimate with BFS hop counts on (start, goal) pairs.
    Unreachable pairs are dropped; ``mean_ratio`` is mean estimate / mean hops.
    """
    starts, goals = np.atleast_2d(starts), np.atleast_2d(goals)
    hops = env.bfs_distance_fn()(starts, goals)
    keep = np.isfinite(hops)
    if keep.sum() < 2:
        raise PreconditionError("distance_calibration needs at least two connected pairs")
    estimate = np.asarray(distance(starts[keep], goals[keep]), dtype=np.float64).reshape(-1)
    hops = hops[keep]
    correlation = spearmanr(estimate, hops)[0]
    return DistanceCalibration(
        pairs=int(keep.sum()),
        rank_correlation=float(correlation) if np.isfinite(correlation) else 0.0,
        mean_ratio=float(estimate.mean() / max(hops.mean(), 1e-12)),
        mean_estimate=float(estimate.mean()),
        mean_hops=float(hops.mean()),
    )

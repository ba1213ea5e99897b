"""
Bridge-point search over a distance estimate.

A candidate b is accepted when D(s, b) + D(b, g) + margin < D(s, g). Candidates
are drawn in one batch and evaluated together; the first accepted one in draw
order wins, which matches a sequential search that stops at the first hit.
"""
import logging
from typing import Callable, Optional

import numpy as np

from app.core.exceptions import PreconditionError
from app.schemas.plan import BridgePlan, BridgeRecord, CandidateMode, PlanSource

logger = logging.getLogger(__name__)

Distance = Callable[[np.ndarray, np.ndarray], np.ndarray]
DEFAULT_MARGIN = 2.0


class CandidateSource:
    def __init__(self, mode: CandidateMode, budget: int, draw: Callable[[np.random.Generator, int], np.ndarray]):
        if budget < 0:
            raise PreconditionError("Candidate budget must be non-negative")
        self.mode = CandidateMode(mode)
        self.budget = int(budget)
        self._draw = draw

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        if self.budget == 0:
            return np.zeros((0, 0))
        return np.asarray(self._draw(rng, self.budget), dtype=np.float64)

    @classmethod
    def from_buffer(cls, buffer, budget: int = 64) -> "CandidateSource":
        return cls(CandidateMode.REPLAY_STATES, budget, lambda rng, k: buffer.sample_states(k, rng))

    @classmethod
    def from_env(cls, env, budget: int = 64) -> "CandidateSource":
        return cls(CandidateMode.UNIFORM_FREE_SPACE, budget,
                   lambda rng, k: np.array([env.sample_free_position(rng) for _ in range(k)]))

    @classmethod
    def from_points(cls, points, budget: Optional[int] = None) -> "CandidateSource":
        points = np.asarray(points, dtype=np.float64)
        budget = len(points) if budget is None else budget
        return cls(CandidateMode.FIXED_POINTS, budget, lambda rng, k: points[:k])


def search_bridge(distance: Distance, start, goal, candidates: CandidateSource, rng: np.random.Generator,
                  margin: float = DEFAULT_MARGIN) -> BridgePlan:
    pool = candidates.draw(rng)
    if len(pool) == 0:
        return BridgePlan(source=PlanSource.SEARCH_EXHAUSTED)
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    k = len(pool)
    d_sg = float(np.asarray(distance(start[None, :], goal[None, :])).reshape(-1)[0])
    d_sb = np.asarray(distance(np.repeat(start[None, :], k, axis=0), pool), dtype=np.float64).reshape(-1)
    d_bg = np.asarray(distance(pool, np.repeat(goal[None, :], k, axis=0)), dtype=np.float64).reshape(-1)
    hits = np.flatnonzero(d_sb + d_bg + margin < d_sg)
    if hits.size == 0:
        return BridgePlan(source=PlanSource.SEARCH_EXHAUSTED, candidates_evaluated=k)
    i = int(hits[0])
    record = BridgeRecord(start=start.tolist(), bridge=pool[i].tolist(), goal=goal.tolist(),
                          d_start_goal=d_sg, d_start_bridge=float(d_sb[i]), d_bridge_goal=float(d_bg[i]),
                          margin=margin)
    return BridgePlan(waypoints=[pool[i].tolist()], source=PlanSource.FOUND, accepted=[record],
                      candidates_evaluated=i + 1)


def plan_waypoints(distance: Distance, start, goal, depth: int, candidates: CandidateSource,
                   rng: np.random.Generator, margin: float = DEFAULT_MARGIN) -> BridgePlan:
    """
    Recursive split: a bridge found for (start, goal) is refined on both legs
    while depth remains. Waypoints come back in traversal order.
    """
    if depth < 1:
        raise PreconditionError("plan_waypoints requires depth >= 1")
    top = search_bridge(distance, start, goal, candidates, rng, margin)
    if not top.found or depth == 1:
        return top
    bridge = np.asarray(top.waypoints[0])
    left = plan_waypoints(distance, start, bridge, depth - 1, candidates, rng, margin)
    right = plan_waypoints(distance, bridge, goal, depth - 1, candidates, rng, margin)
    return BridgePlan(
        waypoints=left.waypoints + top.waypoints + right.waypoints,
        source=PlanSource.FOUND,
        accepted=top.accepted + left.accepted + right.accepted,
        candidates_evaluated=top.candidates_evaluated + left.candidates_evaluated + right.candidates_evaluated,
    )

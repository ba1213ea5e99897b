from typing import List

import numpy as np

from app.AI.policy import GoalPolicy
from app.core.exceptions import PreconditionError
from app.schemas.plan import BridgePlan


class WaypointSelector:
    """
    Stateful goal selector: commands the first unvisited waypoint, then the
    final goal. The waypoint index only moves forward.
    """

    def __init__(self, policy: GoalPolicy, plan: BridgePlan, final_goal, reach_radius: float):
        if reach_radius <= 0:
            raise PreconditionError("reach_radius must be positive")
        self.policy = policy
        self.waypoints: List[np.ndarray] = [np.asarray(w, dtype=np.float64) for w in plan.waypoints]
        self.final_goal = np.asarray(final_goal, dtype=np.float64)
        self.reach_radius = float(reach_radius)
        self.index = 0

    @property
    def finished(self) -> bool:
        return self.index >= len(self.waypoints)

    def commanded_goal(self, state) -> np.ndarray:
        state = np.asarray(state, dtype=np.float64)
        while not self.finished and np.linalg.norm(state - self.waypoints[self.index]) <= self.reach_radius:
            self.index += 1
        return self.final_goal if self.finished else self.waypoints[self.index]

    def __call__(self, state) -> np.ndarray:
        return self.policy(state, self.commanded_goal(state))


def waypoint_policy(policy: GoalPolicy, plan: BridgePlan, final_goal, reach_radius: float) -> WaypointSelector:
    return WaypointSelector(policy, plan, final_goal, reach_radius)

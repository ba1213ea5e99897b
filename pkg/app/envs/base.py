import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ConfigurationError, ContractViolationError, UnsupportedOperationError
from app.envs.grid import Cell, OccupancyGrid
from app.schemas.env import EnvSpec, Wall

logger = logging.getLogger(__name__)

MAX_RESET_TRIES = 10_000

Task = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class EnvState:
    position: np.ndarray
    goal: np.ndarray
    steps_taken: int = 0


class PointEnv:
    """
    Point mass in a box with optional axis-aligned walls (2-D only).

    A step moves by ``step_scale * action`` one axis at a time; an axis whose
    swept segment touches a wall is blocked while the others still move, so the
    agent slides along walls. Positions are clipped to the world bounds.
    """

    def __init__(self, spec: EnvSpec, walls: Sequence[Wall] = (), fixed_task: Optional[Task] = None,
                 landmarks: Optional[Dict[str, Cell]] = None):
        self.spec = spec
        self.low, self.high = spec.observation_bounds()
        self.action_low, self.action_high = spec.action_bounds()
        self.walls = list(walls)
        if self.walls and spec.state_dim != 2:
            raise ConfigurationError("Walls are only supported in 2-D environments")
        self._wall_array = np.array([w.as_tuple() for w in self.walls], dtype=np.float64).reshape(-1, 4)
        self.grid = (OccupancyGrid(self.low, self.high, self.walls, spec.step_scale)
                     if spec.state_dim == 2 else None)
        self.fixed_task = None
        if fixed_task is not None:
            self.fixed_task = (np.asarray(fixed_task[0], dtype=np.float64), np.asarray(fixed_task[1], dtype=np.float64))
        self.landmarks = dict(landmarks or {})

    @property
    def name(self) -> str:
        return self.spec.name

    # ------------------------------------------------------------ geometry
    def inside_wall(self, position) -> bool:
        if not len(self._wall_array):
            return False
        x, y = float(position[0]), float(position[1])
        w = self._wall_array
        return bool(np.any((w[:, 0] <= x) & (x <= w[:, 2]) & (w[:, 1] <= y) & (y <= w[:, 3])))

    def is_free(self, position) -> bool:
        p = np.asarray(position, dtype=np.float64)
        return bool(np.all(p >= self.low) and np.all(p <= self.high)) and not self.inside_wall(p)

    def _axis_blocked(self, position: np.ndarray, axis: int, target: float) -> bool:
        if not len(self._wall_array):
            return False
        other = 1 - axis
        lo, hi = min(position[axis], target), max(position[axis], target)
        w = self._wall_array
        on_other = (w[:, other] <= position[other]) & (position[other] <= w[:, other + 2])
        overlap = (w[:, axis] <= hi) & (lo <= w[:, axis + 2])
        return bool(np.any(on_other & overlap))

    def line_of_sight(self, a, b) -> bool:
        """True when the closed segment a-b misses every wall (slab test)."""
        a = np.asarray(a, dtype=np.float64)[:2]
        b = np.asarray(b, dtype=np.float64)[:2]
        d = b - a
        for x_min, y_min, x_max, y_max in self._wall_array:
            t0, t1 = 0.0, 1.0
            hit = True
            for axis, (lo, hi) in enumerate(((x_min, x_max), (y_min, y_max))):
                if abs(d[axis]) < 1e-12:
                    if a[axis] < lo or a[axis] > hi:
                        hit = False
                        break
                    continue
                ta, tb = (lo - a[axis]) / d[axis], (hi - a[axis]) / d[axis]
                t0, t1 = max(t0, min(ta, tb)), min(t1, max(ta, tb))
                if t0 > t1:
                    hit = False
                    break
            if hit:
                return False
        return True

    # ------------------------------------------------------------- dynamics
    def goal_reached(self, position, goal) -> bool:
        return float(np.linalg.norm(np.asarray(position) - np.asarray(goal))) <= self.spec.goal_radius

    def distance_to_goal(self, position, goal) -> float:
        return float(np.linalg.norm(np.asarray(position, dtype=np.float64) - np.asarray(goal, dtype=np.float64)))

    def step(self, state: EnvState, action) -> Tuple[EnvState, bool]:
        action = np.clip(np.asarray(action, dtype=np.float64), self.action_low, self.action_high)
        if action.shape != (self.spec.action_dim,):
            raise ContractViolationError(f"Action shape {action.shape} expected ({self.spec.action_dim},)")
        delta = self.spec.step_scale * action
        position = np.array(state.position, dtype=np.float64)
        for axis in range(self.spec.state_dim):
            if delta[axis] == 0.0:
                continue
            target = float(np.clip(position[axis] + delta[axis], self.low[axis], self.high[axis]))
            if self.spec.state_dim == 2 and self._axis_blocked(position, axis, target):
                continue
            position[axis] = target
        next_state = EnvState(position=position, goal=state.goal, steps_taken=state.steps_taken + 1)
        return next_state, self.goal_reached(position, state.goal)

    # --------------------------------------------------------------- resets
    def sample_free_position(self, rng: np.random.Generator) -> np.ndarray:
        for _ in range(MAX_RESET_TRIES):
            if self.grid is not None:
                cell = (int(rng.integers(self.grid.shape[0])), int(rng.integers(self.grid.shape[1])))
                if self.grid.free[cell]:
                    return self.grid.center(cell)
            else:
                return rng.uniform(self.low, self.high)
        raise ConfigurationError(f"{self.name}: no free space found after {MAX_RESET_TRIES} tries")

    def reset(self, rng: np.random.Generator, task: Optional[Task] = None) -> EnvState:
        if task is None:
            task = self.fixed_task
        if task is not None:
            return EnvState(position=np.array(task[0], dtype=np.float64), goal=np.array(task[1], dtype=np.float64))
        start = self.sample_free_position(rng)
        for _ in range(MAX_RESET_TRIES):
            goal = self.sample_free_position(rng)
            if not np.array_equal(goal, start):
                return EnvState(position=start, goal=goal)
        raise ConfigurationError(f"{self.name}: could not sample a goal distinct from the start")

    # --------------------------------------------------------------- oracle
    def require_grid(self) -> OccupancyGrid:
        if self.grid is None:
            raise UnsupportedOperationError(f"{self.name} has no grid; use analytic_distance")
        return self.grid

    def cell_of(self, position) -> Cell:
        return self.require_grid().cell_of(position)

    def cell_center(self, cell: Cell) -> np.ndarray:
        return self.require_grid().center(cell)

    def bfs_distance(self, a: Cell, b: Cell) -> float:
        return self.require_grid().bfs_distance(a, b)

    def max_bfs_distance(self) -> int:
        return self.require_grid().max_bfs_distance()

    def bfs_distance_fn(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        """Batched hop-count distance over positions, for planners and checks."""
        grid = self.require_grid()

        def distance(starts: np.ndarray, goals: np.ndarray) -> np.ndarray:
            starts = np.atleast_2d(starts)
            goals = np.atleast_2d(goals)
            return np.array([float(grid.bfs_distance(grid.cell_of(s), grid.cell_of(g)))
                             for s, g in zip(starts, goals)])
        return distance

    @staticmethod
    def analytic_distance(a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        return np.linalg.norm(a - b, axis=-1)

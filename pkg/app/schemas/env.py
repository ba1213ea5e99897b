from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator


class Wall(BaseModel):
    """Axis-aligned rectangle in world units (closed set)."""
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @model_validator(mode="after")
    def check_area(self):
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"Wall has no area: {self.as_tuple()}")
        return self

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


class EnvSpec(BaseModel):
    """Contract between an environment and the learners."""
    name: str
    state_dim: int = Field(..., ge=1)
    action_dim: int = Field(..., ge=1)
    action_low: List[float]
    action_high: List[float]
    observation_low: List[float]
    observation_high: List[float]
    goal_radius: float = Field(..., gt=0)
    step_scale: float = Field(..., gt=0)
    horizon: int = Field(500, ge=1, description="Evaluation step budget")
    train_horizon: int = Field(200, ge=1, description="Training episode length")

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.action_low) != self.action_dim or len(self.action_high) != self.action_dim:
            raise ValueError("action bounds must match action_dim")
        if len(self.observation_low) != self.state_dim or len(self.observation_high) != self.state_dim:
            raise ValueError("observation bounds must match state_dim")
        if any(lo >= hi for lo, hi in zip(self.action_low, self.action_high)):
            raise ValueError("action box is empty")
        if any(lo >= hi for lo, hi in zip(self.observation_low, self.observation_high)):
            raise ValueError("observation box is empty")
        return self

    def action_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.action_low, dtype=np.float64), np.asarray(self.action_high, dtype=np.float64)

    def observation_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return (np.asarray(self.observation_low, dtype=np.float64),
                np.asarray(self.observation_high, dtype=np.float64))


class MapCalibration(BaseModel):
    """Hop-count facts of a shipped map."""
    name: str
    free_cells: int
    max_bfs_distance: Optional[int] = None
    start_to_trap: Optional[int] = None
    start_to_goal: Optional[int] = None

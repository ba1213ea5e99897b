from typing import Callable, Optional

import numpy as np

from app.schemas.env import EnvSpec

GoalPolicy = Callable[[np.ndarray, np.ndarray], np.ndarray]


class ActionBox:
    def __init__(self, spec: EnvSpec):
        self.low, self.high = spec.action_bounds()
        self.center = 0.5 * (self.low + self.high)
        self.half_range = 0.5 * (self.high - self.low)

    def clip(self, action) -> np.ndarray:
        return np.clip(action, self.low, self.high)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.low, self.high)


def exploratory_action(greedy: np.ndarray, box: ActionBox, noise_scale: float, explore_prob: float,
                       rng: Optional[np.random.Generator]) -> np.ndarray:
    """
    With probability ``explore_prob`` a uniform action, otherwise the greedy
    action plus Gaussian noise (std = noise_scale * half range), clamped.
    """
    if explore_prob > 0.0 and rng.random() < explore_prob:
        return box.sample(rng)
    action = np.asarray(greedy, dtype=np.float64)
    if noise_scale > 0.0:
        action = action + rng.normal(0.0, noise_scale * box.half_range)
    return box.clip(action)


class StateNormalizer:
    """Maps the observation box onto [-1, 1] per coordinate."""

    def __init__(self, low, high):
        low = np.asarray(low, dtype=np.float64)
        high = np.asarray(high, dtype=np.float64)
        self.center = 0.5 * (low + high)
        self.half_range = 0.5 * (high - low)

    @classmethod
    def from_spec(cls, spec: EnvSpec) -> "StateNormalizer":
        return cls(*spec.observation_bounds())

    @classmethod
    def identity(cls, dim: int) -> "StateNormalizer":
        return cls(-np.ones(dim), np.ones(dim))

    def normalize(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.center) / self.half_range

    @property
    def gradient_scale(self) -> np.ndarray:
        return 1.0 / self.half_range

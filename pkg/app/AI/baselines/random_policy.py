import numpy as np

from app.AI.policy import ActionBox


def random_policy(env, rng: np.random.Generator) -> np.ndarray:
    """Uniform action in the environment's action box."""
    return ActionBox(env.spec).sample(rng)


class RandomPolicy:
    """Goal-agnostic policy object with its own rng stream."""

    def __init__(self, env, rng: np.random.Generator):
        self.box = ActionBox(env.spec)
        self.rng = rng

    def __call__(self, s, g) -> np.ndarray:
        return self.box.sample(self.rng)

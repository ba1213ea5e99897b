"""
Distance and forward-model wrappers used by the actor gradient and the planner.

Both learned networks and analytic stand-ins expose the same small surface:

* a distance maps (s, g) batches to (N,) values and returns the gradient of
  ``sum(upstream * D(s, g))`` w.r.t. ``s``;
* a forward model maps (s, a) batches to next states and returns the gradient
  of ``sum(upstream * f(s, a))`` w.r.t. ``a``.
"""
from typing import Optional, Protocol

import numpy as np

from app.AI.numerics.network import Approximator
from app.AI.policy import StateNormalizer


class DistanceFunction(Protocol):
    def value(self, s: np.ndarray, g: np.ndarray) -> np.ndarray: ...

    def grad_state(self, s: np.ndarray, g: np.ndarray, upstream: np.ndarray) -> np.ndarray: ...


class ForwardModel(Protocol):
    def predict(self, s: np.ndarray, a: np.ndarray) -> np.ndarray: ...

    def grad_action(self, s: np.ndarray, a: np.ndarray, upstream: np.ndarray) -> np.ndarray: ...


class LearnedDistance:
    """
    Critic read as a distance in [0, upper]. The softplus head gives the lower
    bound; outputs above ``upper`` are cut and carry no gradient.
    """

    def __init__(self, critic: Approximator, normalizer: StateNormalizer, upper: Optional[float] = None):
        self.critic = critic
        self.normalizer = normalizer
        self.upper = upper

    def inputs(self, s, g) -> np.ndarray:
        s, g = np.atleast_2d(s), np.atleast_2d(g)
        return np.concatenate([self.normalizer.normalize(s), self.normalizer.normalize(g)], axis=1)

    def raw(self, s, g) -> np.ndarray:
        return self.critic.forward(self.inputs(s, g))[:, 0]

    def value(self, s, g) -> np.ndarray:
        values = self.raw(s, g)
        return values if self.upper is None else np.minimum(values, self.upper)

    __call__ = value

    def grad_state(self, s, g, upstream) -> np.ndarray:
        x = self.inputs(s, g)
        up = np.asarray(upstream, dtype=np.float64).reshape(-1, 1)
        if self.upper is not None:
            up = np.where(self.critic.forward(x) > self.upper, 0.0, up)
        dim = x.shape[1] // 2
        return self.critic.grad_input(x, up)[:, :dim] * self.normalizer.gradient_scale


class LearnedModel:
    """Residual predictor f(s, a) = s + net(norm(s), a)."""

    def __init__(self, model: Approximator, normalizer: StateNormalizer):
        self.model = model
        self.normalizer = normalizer

    def inputs(self, s, a) -> np.ndarray:
        s, a = np.atleast_2d(s), np.atleast_2d(a)
        return np.concatenate([self.normalizer.normalize(s), a], axis=1)

    def predict(self, s, a) -> np.ndarray:
        return np.atleast_2d(s) + self.model.forward(self.inputs(s, a))

    def grad_action(self, s, a, upstream) -> np.ndarray:
        x = self.inputs(s, a)
        dim = np.atleast_2d(s).shape[1]
        return self.model.grad_input(x, np.atleast_2d(upstream))[:, dim:]


class EuclideanDistance:
    """D(s, g) = ||s - g||_2, the true distance of an open point space."""

    def __init__(self, floor: float = 1e-12):
        self.floor = floor

    def value(self, s, g) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(s) - np.atleast_2d(g), axis=1)

    __call__ = value

    def grad_state(self, s, g, upstream) -> np.ndarray:
        diff = np.atleast_2d(s) - np.atleast_2d(g)
        norm = np.maximum(np.linalg.norm(diff, axis=1, keepdims=True), self.floor)
        return np.asarray(upstream).reshape(-1, 1) * diff / norm


class SquaredDistance:
    def value(self, s, g) -> np.ndarray:
        return np.sum((np.atleast_2d(s) - np.atleast_2d(g)) ** 2, axis=1)

    __call__ = value

    def grad_state(self, s, g, upstream) -> np.ndarray:
        return 2.0 * np.asarray(upstream).reshape(-1, 1) * (np.atleast_2d(s) - np.atleast_2d(g))


class PointDynamics:
    """Known open-space dynamics f(s, a) = s + step_scale * a."""

    def __init__(self, step_scale: float = 1.0):
        self.step_scale = step_scale

    def predict(self, s, a) -> np.ndarray:
        return np.atleast_2d(s) + self.step_scale * np.atleast_2d(a)

    def grad_action(self, s, a, upstream) -> np.ndarray:
        return self.step_scale * np.atleast_2d(upstream)

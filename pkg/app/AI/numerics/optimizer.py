from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from app.AI.numerics.network import Approximator
from app.core.exceptions import ContractViolationError, NonFiniteError


@dataclass
class OptimizerState:
    """Adam accumulators mirroring the parameter list of one network."""
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net: Approximator, learning_rate: float = 1e-3, beta1: float = 0.9,
                    beta2: float = 0.999, epsilon: float = 1e-8) -> "OptimizerState":
        return cls(
            learning_rate=learning_rate, beta1=beta1, beta2=beta2, epsilon=epsilon,
            first_moments=[np.zeros_like(p) for p in net.params],
            second_moments=[np.zeros_like(p) for p in net.params],
        )


def opt_step(net: Approximator, grads: Sequence[np.ndarray],
             state: OptimizerState) -> Tuple[Approximator, OptimizerState]:
    """
    One bias-corrected Adam step, in place.

    Gradients are validated before anything is mutated, so a rejected step
    leaves both the network and the accumulators untouched.
    """
    params = net.params
    if len(grads) != len(params):
        raise ContractViolationError(f"Expected {len(params)} gradients, got {len(grads)}")
    for p, g in zip(params, grads):
        if np.shape(g) != p.shape:
            raise ContractViolationError(f"Gradient shape {np.shape(g)} expected {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("Non-finite gradient rejected by optimizer")

    if not state.first_moments:
        state.first_moments = [np.zeros_like(p) for p in params]
        state.second_moments = [np.zeros_like(p) for p in params]

    state.step_count += 1
    t = state.step_count
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(params, grads, state.first_moments, state.second_moments):
        g = np.asarray(g, dtype=p.dtype)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= (state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)).astype(p.dtype)
    return net, state

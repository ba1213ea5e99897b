import logging
from typing import Optional

import numpy as np

from app.AI.gdg.agent import actor_objective, actor_objective_gradient
from app.AI.gdg.functions import LearnedDistance, LearnedModel
from app.AI.numerics.gradcheck import finite_diff_check, numeric_param_gradient, relative_error
from app.AI.numerics.network import Approximator, OutputActivation
from app.AI.policy import StateNormalizer
from app.schemas.report import GradientSuiteReport

logger = logging.getLogger(__name__)

ACTIVATIONS = list(OutputActivation)


def random_network(rng: np.random.Generator) -> Approximator:
    depth = int(rng.integers(1, 3))
    sizes = [int(rng.integers(2, 6))] + [int(rng.integers(3, 9)) for _ in range(depth)] + [int(rng.integers(1, 4))]
    activation = ACTIVATIONS[int(rng.integers(len(ACTIVATIONS)))]
    return Approximator(sizes, activation, rng=rng, dtype=np.float64)


def composite_gradient_error(rng: np.random.Generator, state_dim: int = 2, action_dim: int = 2,
                             batch: int = 3, hidden: int = 6) -> float:
    """Worst relative error of the actor-objective gradient against finite differences."""
    critic = Approximator([2 * state_dim, hidden, 1], OutputActivation.SOFTPLUS, rng=rng, dtype=np.float64)
    model = Approximator([state_dim + action_dim, hidden, state_dim], rng=rng, dtype=np.float64)
    actor = Approximator([2 * state_dim, hidden, action_dim], OutputActivation.TANH, rng=rng, dtype=np.float64)
    normalizer = StateNormalizer.identity(state_dim)
    distance = LearnedDistance(critic, normalizer)
    dynamics = LearnedModel(model, normalizer)
    states = rng.uniform(-1, 1, size=(batch, state_dim))
    goals = rng.uniform(-1, 1, size=(batch, state_dim))

    _, analytic = actor_objective_gradient(actor, normalizer, states, goals, distance, dynamics)
    numeric = numeric_param_gradient(
        actor, lambda: actor_objective(actor, normalizer, states, goals, distance, dynamics))
    return max(float(relative_error(a, n).max()) for a, n in zip(analytic, numeric))


def verify_gradients(networks: int = 20, seed: int = 0, tolerance: float = 1e-4,
                     composite_tolerance: float = 1e-3, rng: Optional[np.random.Generator] = None) -> GradientSuiteReport:
    """Finite-difference suite over random small networks plus the composite actor objective."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    worst_param = worst_input = worst_composite = 0.0
    failures = []
    for i in range(networks):
        net = random_network(rng)
        report = finite_diff_check(net, rng.uniform(-1, 1, size=net.input_size), tolerance, rng=rng)
        worst_param = max(worst_param, report.max_param_error)
        worst_input = max(worst_input, report.max_input_error)
        if not report.passed:
            failures.append(f"network {i} {net.layer_sizes} {net.output_activation.value}: "
                            f"param={report.max_param_error:.2e} input={report.max_input_error:.2e}")
        composite = composite_gradient_error(rng)
        worst_composite = max(worst_composite, composite)
        if composite >= composite_tolerance:
            failures.append(f"composite {i}: {composite:.2e}")
    passed = not failures
    if passed:
        logger.info(f"✅ Gradient suite passed on {networks} networks")
    else:
        logger.error(f"❌ Gradient suite: {len(failures)} failures")
    return GradientSuiteReport(networks=networks, worst_param_error=worst_param, worst_input_error=worst_input,
                               worst_composite_error=worst_composite, failures=failures, passed=passed)

"""
Analytic parity between GDG and DDPG on the open 3-D reach task.

With D(s, g) = ||s - g|| and V(s||g) = -||s - g||, minimising D(f(s, a), g) and
maximising V(f(s, a)||g) pick the same action; this module checks that on a
discretised action grid and runs both methods with the analytic functions.
"""
import itertools
import logging
from typing import Dict, List, Optional

import numpy as np

from app.AI.gdg.functions import EuclideanDistance, PointDynamics
from app.core.presets import preset_config
from app.envs.base import PointEnv
from app.schemas.config import Method
from app.schemas.report import EvalReport
from app.services.experiment_service import run_many

logger = logging.getLogger(__name__)


def action_grid(env: PointEnv, points: int = 21) -> np.ndarray:
    axes = [np.linspace(lo, hi, points) for lo, hi in zip(env.action_low, env.action_high)]
    return np.array(list(itertools.product(*axes)))


def greedy_action_agreement(env: PointEnv, pairs: int = 1000, grid_points: int = 21,
                            rng: Optional[np.random.Generator] = None) -> float:
    """Fraction of (s, g) pairs where argmin D and argmax V select the same grid action."""
    rng = rng if rng is not None else np.random.default_rng(0)
    actions = action_grid(env, grid_points)
    distance = EuclideanDistance()
    dynamics = PointDynamics(env.spec.step_scale)
    agree = 0
    for _ in range(pairs):
        s = env.sample_free_position(rng)
        g = env.sample_free_position(rng)
        predicted = dynamics.predict(np.repeat(s[None], len(actions), axis=0), actions)
        d_values = distance.value(predicted, np.repeat(g[None], len(actions), axis=0))
        v_values = -np.linalg.norm(predicted - g, axis=1)
        agree += int(np.argmin(d_values) == np.argmax(v_values))
    return agree / pairs


def run_parity(seeds: List[int], out_root: str, episodes: Optional[int] = None,
               workers: Optional[int] = None) -> Dict[str, List[EvalReport]]:
    configs = [
        preset_config("reach3d-parity", method=method.value, seed=seed, episodes=episodes)
        for method in (Method.GDG, Method.DDPG_DENSE) for seed in seeds
    ]
    reports = run_many(configs, out_root, workers)
    grouped: Dict[str, List[EvalReport]] = {}
    for report in reports:
        grouped.setdefault(report.method, []).append(report)
    for method, items in grouped.items():
        finals = [r.final_success_rate or 0.0 for r in items]
        logger.info(f"📈 parity {method}: final success mean={np.mean(finals):.3f}")
    return grouped

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Union

from app.AI.baselines.ddpg import AnalyticQ, DdpgAgent
from app.AI.baselines.random_policy import RandomPolicy
from app.AI.gdg.agent import GdgAgent
from app.AI.gdg.functions import EuclideanDistance, PointDynamics
from app.AI.planner.bridge import CandidateSource
from app.core.config import settings
from app.envs.maps import make_env
from app.schemas.config import Method, RunConfig
from app.schemas.report import EvalReport
from app.services.evaluation_service import BridgingPolicy, GoalConditionedPolicy
from app.services.metrics_service import emit_metrics
from app.services.training_service import run_training

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.npz"
CONFIG_NAME = "config.json"


def run_experiment(config: RunConfig, out_root: Union[str, Path, None] = None) -> EvalReport:
    """Trains one (config, seed) run and persists config, checkpoint and metrics in its own directory."""
    run_dir = Path(out_root or settings.RUNS_DIR) / config.run_name
    run_dir.mkdir(parents=True, exist_ok=True)
    result = run_training(config)
    result.config.to_file(run_dir / CONFIG_NAME)
    if result.runner is not None and not result.report.aborted:
        result.runner.save(run_dir / CHECKPOINT_NAME)
    emit_metrics(result.report, run_dir, result.config, result.trajectories)
    return result.report


def run_many(configs: Sequence[RunConfig], out_root: Union[str, Path, None] = None,
             workers: Optional[int] = None) -> List[EvalReport]:
    """Share-nothing parallel runs; an aggregate curves.csv/buckets.csv is written at the root."""
    out_root = Path(out_root or settings.RUNS_DIR)
    workers = workers or settings.WORKERS
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_experiment, configs, [out_root] * len(configs)))
    else:
        reports = [run_experiment(config, out_root) for config in configs]
    emit_metrics(reports, out_root)
    aborted = [r for r in reports if r.aborted]
    if aborted:
        logger.error(f"❌ {len(aborted)} of {len(reports)} runs aborted")
    return reports


class LoadedRun:
    """A finished run restored from its directory, ready for evaluation."""

    def __init__(self, run_dir: Union[str, Path]):
        self.run_dir = Path(run_dir)
        stored = RunConfig.from_file(self.run_dir / CONFIG_NAME)
        self.env = make_env(stored.env)
        self.config = stored.resolved(self.env.spec)
        self.agent = None
        checkpoint = self.run_dir / CHECKPOINT_NAME
        step = self.env.spec.step_scale
        if self.config.method in (Method.GDG, Method.GDG_BRIDGE):
            self.agent = GdgAgent.load(checkpoint)
            if self.config.analytic:
                self.agent.use_analytic_functions(EuclideanDistance(), PointDynamics(step))
        elif self.config.method != Method.RANDOM:
            self.agent = DdpgAgent.load(checkpoint)
            if self.config.analytic:
                self.agent.use_analytic_critic(AnalyticQ(EuclideanDistance(), PointDynamics(step)))

    def policy(self, rng):
        if self.agent is None:
            return GoalConditionedPolicy(RandomPolicy(self.env, rng))
        if self.config.method == Method.GDG_BRIDGE:
            # the replay buffer is not checkpointed; candidates come from free space
            candidates = CandidateSource.from_env(self.env, self.config.planner.candidate_budget)
            return BridgingPolicy(self.agent.policy, self.agent.distance, candidates, self.config.planner,
                                  self.config.planner.reach_radius, rng)
        return GoalConditionedPolicy(self.agent.policy)

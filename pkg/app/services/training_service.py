import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from app.AI.gdg.replay import EpisodeTrace
from app.AI.planner.waypoints import WaypointSelector
from app.core.config import settings
from app.core.exceptions import GdgError
from app.core.presets import estimated_update_seconds
from app.envs.base import PointEnv
from app.envs.maps import make_env
from app.schemas.config import Method, RunConfig
from app.schemas.report import EvalPoint, EvalReport
from app.services.evaluation_service import distance_bucket_eval, evaluate, sample_tasks
from app.services.runners import GdgRunner, MethodRunner, build_runner

logger = logging.getLogger(__name__)

RNG_STREAMS = ("env", "agent", "buffer", "explore", "planner", "relabel", "eval_tasks", "eval_policy")


def spawn_rngs(seed: int) -> dict:
    """Independent generators per concern, all derived from the run seed."""
    children = np.random.SeedSequence(seed).spawn(len(RNG_STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(RNG_STREAMS, children)}


@dataclass
class TrainingResult:
    config: RunConfig
    report: EvalReport
    runner: Optional[MethodRunner] = None
    trajectories: List[np.ndarray] = field(default_factory=list)

    @property
    def agent(self):
        return self.runner.agent if self.runner is not None else None


class TrainingService:
    """Outer loop of one seeded run: explore, store, update, evaluate."""

    def __init__(self, config: RunConfig, env: Optional[PointEnv] = None):
        self.env = env or make_env(config.env)
        self.config = config.resolved(self.env.spec)
        self.rngs = spawn_rngs(self.config.seed)
        self.runner = build_runner(self.env, self.config, self.rngs)
        self.eval_tasks = sample_tasks(self.env, self.config.eval_tasks, self.rngs["eval_tasks"])
        self.bridge_episodes = 0
        self.tag = f"[{self.config.method.value} {self.env.name} seed={self.config.seed}]"

    def _episode(self) -> Tuple[EpisodeTrace, np.ndarray]:
        config = self.config
        state = self.env.reset(self.rngs["env"])
        goal = state.goal
        selector = None
        if config.method == Method.GDG_BRIDGE and self.rngs["planner"].random() < config.epsilon_bridge:
            self.bridge_episodes += 1
            runner: GdgRunner = self.runner
            plan = runner.bridging(self.rngs["planner"]).plan(state.position, goal)
            if plan.found:
                selector = WaypointSelector(runner.agent.policy, plan, goal, config.planner.reach_radius)

        states, actions = [state.position], []
        for _ in range(config.horizon):
            commanded = selector.commanded_goal(state.position) if selector is not None else goal
            action = self.runner.explore(state.position, commanded)
            state, reached = self.env.step(state, action)
            states.append(state.position)
            actions.append(action)
            if reached:
                break
        trace = EpisodeTrace(np.array(states), np.array(actions).reshape(-1, self.env.spec.action_dim))
        return trace, goal

    def _evaluate(self, episodes: int, record: bool = False):
        policy = self.runner.evaluation_policy(np.random.default_rng([self.config.seed, episodes]))
        result = evaluate(policy, self.env, self.eval_tasks, self.config.eval_budget, record_trajectories=record)
        logger.info(f"📈 {self.tag} episode {episodes}: success={result.success_rate:.3f} "
                    f"final_distance={result.mean_final_distance:.2f}")
        point = EvalPoint(episodes_trained=episodes, success_rate=result.success_rate,
                          mean_final_distance=result.mean_final_distance, successes=result.successes,
                          tasks=len(self.eval_tasks))
        return point, result

    def run(self) -> TrainingResult:
        config = self.config
        report = EvalReport(method=config.method.value, env=self.env.name, seed=config.seed)
        trajectories: List[np.ndarray] = []
        estimate = estimated_update_seconds(config)
        budget = f" (updates ~{estimate / 60:.1f} min)" if estimate else ""
        logger.info(f"🚀 {self.tag} training for {config.episodes} episodes{budget}")
        try:
            for episode in tqdm(range(1, config.episodes + 1), desc=self.tag,
                                disable=not settings.PROGRESS_BAR, leave=False):
                trace, goal = self._episode()
                self.runner.store(trace, goal)
                updates = trace.steps if config.updates_per_episode is None else config.updates_per_episode
                self.runner.update(updates)
                report.episodes = episode
                if episode % config.eval_every == 0 or episode == config.episodes:
                    last = episode == config.episodes
                    point, result = self._evaluate(episode, record=last and config.render_tasks > 0)
                    report.series.append(point)
                    if last:
                        report.outcomes = result.outcomes
                        trajectories = result.trajectories[: config.render_tasks]
            if config.bucket_distances and self.env.grid is not None:
                policy = self.runner.evaluation_policy(np.random.default_rng([config.seed, 0xB0C]))
                table = distance_bucket_eval(policy, self.env, config.bucket_distances, config.bucket_tasks,
                                             [config.seed], config.eval_budget)
                report.buckets = table.rows
        except GdgError as exc:
            logger.error(f"❌ {self.tag} aborted at episode {report.episodes}: {exc}")
            report.aborted = True
            report.diagnostic = f"{type(exc).__name__}: {exc}"
        report.bridge_episodes = self.bridge_episodes
        if not report.aborted:
            logger.info(f"✅ {self.tag} finished: final success={report.final_success_rate}")
        return TrainingResult(config=config, report=report, runner=self.runner, trajectories=trajectories)


def run_training(config: RunConfig, env: Optional[PointEnv] = None) -> TrainingResult:
    return TrainingService(config, env).run()

"""
Per-method glue between the training loop and the learners.

A runner knows how its method explores, stores an episode, performs updates
and exposes a greedy policy for evaluation.
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from app.AI.baselines.ddpg import AnalyticQ, DdpgAgent, RewardMode, RewardSpec
from app.AI.baselines.her import her_relabel
from app.AI.baselines.random_policy import RandomPolicy
from app.AI.gdg.agent import GdgAgent
from app.AI.gdg.functions import EuclideanDistance, PointDynamics
from app.AI.gdg.replay import EpisodeTrace, ReplayBuffer, episode_transitions, store_episode
from app.AI.planner.bridge import CandidateSource
from app.envs.base import PointEnv
from app.schemas.config import Method, RunConfig
from app.schemas.plan import CandidateMode
from app.services.evaluation_service import BridgingPolicy, GoalConditionedPolicy

logger = logging.getLogger(__name__)


class MethodRunner:
    agent = None

    def __init__(self, env: PointEnv, config: RunConfig, rngs: dict):
        self.env = env
        self.config = config
        self.rngs = rngs
        self.updates = 0

    def explore(self, s, g) -> np.ndarray:
        raise NotImplementedError

    def store(self, trace: EpisodeTrace, goal) -> int:
        return 0

    def update(self, count: int) -> int:
        return 0

    def evaluation_policy(self, rng: np.random.Generator):
        raise NotImplementedError

    def digest(self) -> str:
        return self.agent.digest() if self.agent is not None else ""

    def save(self, path: Path) -> Optional[Path]:
        return self.agent.save(path) if self.agent is not None else None


class RandomRunner(MethodRunner):
    def __init__(self, env, config, rngs):
        super().__init__(env, config, rngs)
        self.policy = RandomPolicy(env, rngs["explore"])

    def explore(self, s, g) -> np.ndarray:
        return self.policy(s, g)

    def evaluation_policy(self, rng):
        return GoalConditionedPolicy(RandomPolicy(self.env, rng))


class _BufferedRunner(MethodRunner):
    def __init__(self, env, config, rngs):
        super().__init__(env, config, rngs)
        spec = env.spec
        self.buffer = ReplayBuffer(config.gdg.buffer_capacity, spec.state_dim, spec.action_dim, rng=rngs["buffer"])

    def explore(self, s, g) -> np.ndarray:
        return self.agent.act(s, g, self.config.noise_scale, self.config.explore_prob, self.rngs["explore"])

    def update(self, count: int) -> int:
        done = 0
        if len(self.buffer) < self.config.gdg.batch_size:
            return done
        for _ in range(count):
            self._train_step()
            done += 1
        self.updates += done
        return done

    def _train_step(self):
        raise NotImplementedError


class GdgRunner(_BufferedRunner):
    def __init__(self, env, config, rngs):
        super().__init__(env, config, rngs)
        self.agent = GdgAgent(env.spec, config.gdg, config.network, rng=rngs["agent"])
        if config.analytic:
            self.agent.use_analytic_functions(EuclideanDistance(), PointDynamics(env.spec.step_scale))

    def store(self, trace, goal) -> int:
        return store_episode(self.buffer, trace, goal, self.env.goal_reached)

    def _train_step(self):
        return self.agent.train_step(self.buffer)

    def candidates(self) -> CandidateSource:
        planner = self.config.planner
        if planner.candidate_mode == CandidateMode.UNIFORM_FREE_SPACE:
            return CandidateSource.from_env(self.env, planner.candidate_budget)
        return CandidateSource.from_buffer(self.buffer, planner.candidate_budget)

    def bridging(self, rng: np.random.Generator) -> BridgingPolicy:
        return BridgingPolicy(self.agent.policy, self.agent.distance, self.candidates(), self.config.planner,
                              self.config.planner.reach_radius, rng)

    def evaluation_policy(self, rng):
        if self.config.method == Method.GDG_BRIDGE:
            return self.bridging(rng)
        return GoalConditionedPolicy(self.agent.policy)


class DdpgRunner(_BufferedRunner):
    def __init__(self, env, config, rngs):
        super().__init__(env, config, rngs)
        mode = RewardMode.DENSE_NEGATIVE_DISTANCE if config.method == Method.DDPG_DENSE else RewardMode.SPARSE
        self.reward = RewardSpec(mode=mode)
        self.agent = DdpgAgent(env.spec, config.ddpg, config.network, config.gdg, self.reward, rng=rngs["agent"])
        if config.analytic:
            self.agent.use_analytic_critic(AnalyticQ(EuclideanDistance(), PointDynamics(env.spec.step_scale)))

    def store(self, trace, goal) -> int:
        if self.config.method == Method.HER:
            items = her_relabel(trace, goal, self.config.ddpg.her_k_future, self.rngs["relabel"], self.env.goal_reached)
        else:
            items = episode_transitions(trace, goal, self.env.goal_reached)
        return self.buffer.extend(items)

    def _train_step(self):
        return self.agent.train_step(self.buffer, reward=self.reward)

    def evaluation_policy(self, rng):
        return GoalConditionedPolicy(self.agent.policy)


RUNNERS = {
    Method.GDG: GdgRunner,
    Method.GDG_BRIDGE: GdgRunner,
    Method.DDPG_SPARSE: DdpgRunner,
    Method.DDPG_DENSE: DdpgRunner,
    Method.HER: DdpgRunner,
    Method.RANDOM: RandomRunner,
}


def build_runner(env: PointEnv, config: RunConfig, rngs: dict) -> MethodRunner:
    return RUNNERS[config.method](env, config, rngs)

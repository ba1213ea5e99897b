"""
DDPG over goal-conditioned inputs s||g, used as the comparison method.

The critic Q(s||g, a) regresses to r + gamma * Q'(s'||g, mu'(s'||g)) with the
bootstrap cut at the goal; the actor ascends dQ/da. Networks mirror the GDG
sizes.
"""
import json
import logging
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Optional, Protocol, Union

import numpy as np
from pydantic import BaseModel

from app.AI.gdg.agent import actor_inputs, build_actor
from app.AI.gdg.functions import DistanceFunction, ForwardModel
from app.AI.gdg.replay import ReplayBuffer, TransitionBatch
from app.AI.numerics.network import Approximator, OutputActivation, load_checkpoint, save_checkpoint, soft_update
from app.AI.numerics.optimizer import OptimizerState, opt_step
from app.AI.policy import ActionBox, StateNormalizer, exploratory_action
from app.core.exceptions import NonFiniteError, PreconditionError
from app.schemas.config import DdpgConfig, GdgConfig, NetworkConfig
from app.schemas.env import EnvSpec

logger = logging.getLogger(__name__)


class RewardMode(str, Enum):
    SPARSE = "sparse"
    DENSE_NEGATIVE_DISTANCE = "dense_negative_distance"


class RewardSpec(BaseModel):
    mode: RewardMode = RewardMode.SPARSE

    def rewards(self, batch: TransitionBatch) -> np.ndarray:
        if self.mode == RewardMode.SPARSE:
            return np.where(batch.reached, 0.0, -1.0)
        return -np.linalg.norm(np.asarray(batch.s_next, dtype=np.float64) - batch.g, axis=1)


class DdpgLosses(NamedTuple):
    critic: float
    actor: float


class QFunction(Protocol):
    def value(self, s: np.ndarray, g: np.ndarray, a: np.ndarray) -> np.ndarray: ...

    def grad_action(self, s: np.ndarray, g: np.ndarray, a: np.ndarray, upstream: np.ndarray) -> np.ndarray: ...


class LearnedQ:
    def __init__(self, critic: Approximator, normalizer: StateNormalizer):
        self.critic = critic
        self.normalizer = normalizer

    def inputs(self, s, g, a) -> np.ndarray:
        return np.concatenate([actor_inputs(self.normalizer, s, g), np.atleast_2d(a)], axis=1)

    def value(self, s, g, a) -> np.ndarray:
        return self.critic.forward(self.inputs(s, g, a))[:, 0]

    def grad_action(self, s, g, a, upstream) -> np.ndarray:
        x = self.inputs(s, g, a)
        return self.critic.grad_input(x, np.asarray(upstream).reshape(-1, 1))[:, x.shape[1] - np.atleast_2d(a).shape[1]:]


class AnalyticQ:
    """Q(s||g, a) = -D(f(s, a), g) for known D and f."""

    def __init__(self, distance: DistanceFunction, model: ForwardModel):
        self.distance = distance
        self.model = model

    def value(self, s, g, a) -> np.ndarray:
        return -self.distance.value(self.model.predict(s, a), g)

    def grad_action(self, s, g, a, upstream) -> np.ndarray:
        predicted = self.model.predict(s, a)
        d_state = self.distance.grad_state(predicted, g, -np.asarray(upstream).reshape(-1))
        return self.model.grad_action(s, a, d_state)


class DdpgAgent:
    def __init__(self, spec: EnvSpec, config: Optional[DdpgConfig] = None, network: Optional[NetworkConfig] = None,
                 shared: Optional[GdgConfig] = None, reward: Optional[RewardSpec] = None,
                 rng: Optional[np.random.Generator] = None):
        self.spec = spec
        self.config = config or DdpgConfig()
        self.network = network or NetworkConfig()
        self.shared = shared or GdgConfig()
        self.reward = reward or RewardSpec()
        rng = rng if rng is not None else np.random.default_rng()
        self.rng = rng
        hidden = list(self.network.hidden_sizes)
        sd, ad = spec.state_dim, spec.action_dim

        self.normalizer = StateNormalizer.from_spec(spec)
        self.box = ActionBox(spec)
        self.critic = Approximator([2 * sd + ad, *hidden, 1], OutputActivation.IDENTITY, rng=rng)
        self.target_critic = self.critic.copy()
        self.actor = build_actor(spec, hidden, rng)
        self.target_actor = self.actor.copy()
        self.learns_critic = True
        self._wire()

    def _optimizer(self, net: Approximator) -> OptimizerState:
        n = self.network
        return OptimizerState.for_network(net, n.learning_rate, n.beta1, n.beta2, n.epsilon)

    def _wire(self) -> None:
        self.q: QFunction = LearnedQ(self.critic, self.normalizer)
        self.target_q = LearnedQ(self.target_critic, self.normalizer)
        self.critic_optimizer = self._optimizer(self.critic)
        self.actor_optimizer = self._optimizer(self.actor)

    def use_critic(self, critic: Approximator, learning_rate: Optional[float] = None) -> None:
        self.critic = critic
        self.target_critic = critic.copy()
        self.q = LearnedQ(self.critic, self.normalizer)
        self.target_q = LearnedQ(self.target_critic, self.normalizer)
        self.critic_optimizer = self._optimizer(critic)
        if learning_rate is not None:
            self.critic_optimizer.learning_rate = learning_rate
        self.learns_critic = True

    def use_analytic_critic(self, q: QFunction) -> None:
        self.q = q
        self.learns_critic = False

    def policy(self, s, g) -> np.ndarray:
        return self.actor.forward(actor_inputs(self.normalizer, s, g))[0]

    __call__ = policy

    def act(self, s, g, noise_scale: float = 0.0, explore_prob: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = rng if rng is not None else self.rng
        return exploratory_action(self.policy(s, g), self.box, noise_scale, explore_prob, rng)

    @property
    def sparse_floor(self) -> float:
        return -1.0 / (1.0 - self.config.gamma)

    def critic_targets(self, batch: TransitionBatch, reward: Optional[RewardSpec] = None) -> np.ndarray:
        reward = reward or self.reward
        r = reward.rewards(batch)
        next_actions = self.target_actor.forward(actor_inputs(self.normalizer, batch.s_next, batch.g))
        bootstrap = self.target_q.value(batch.s_next, batch.g, next_actions)
        targets = r + self.config.gamma * np.where(batch.reached, 0.0, bootstrap)
        if reward.mode == RewardMode.SPARSE:
            targets = np.clip(targets, self.sparse_floor, 0.0)
        return targets

    def critic_update(self, batch: TransitionBatch, reward: Optional[RewardSpec] = None) -> float:
        targets = self.critic_targets(batch, reward)
        x = self.q.inputs(batch.s, batch.g, batch.a)
        error = self.critic.forward(x)[:, 0] - targets
        loss = float(np.mean(error ** 2))
        if not np.isfinite(loss):
            raise NonFiniteError("DDPG critic loss is not finite")
        opt_step(self.critic, self.critic.grad_params(x, (2.0 / len(error)) * error[:, None]), self.critic_optimizer)
        return loss

    def actor_update(self, batch: TransitionBatch) -> float:
        x = actor_inputs(self.normalizer, batch.s, batch.g)
        actions = self.actor.forward(x)
        values = self.q.value(batch.s, batch.g, actions)
        # ascend mean Q, i.e. descend -mean Q
        d_action = self.q.grad_action(batch.s, batch.g, actions, np.full(len(values), -1.0 / len(values)))
        opt_step(self.actor, self.actor.grad_params(x, d_action), self.actor_optimizer)
        return float(np.mean(values))

    def train_step(self, buffer: ReplayBuffer, batch_size: Optional[int] = None,
                   reward: Optional[RewardSpec] = None) -> DdpgLosses:
        batch_size = batch_size or self.shared.batch_size
        if len(buffer) < batch_size:
            raise PreconditionError(f"Buffer holds {len(buffer)} items, batch of {batch_size} required")
        batch = buffer.sample(batch_size)
        critic_loss = self.critic_update(batch, reward) if self.learns_critic else 0.0
        actor_value = self.actor_update(batch)
        if self.learns_critic:
            soft_update(self.target_critic, self.critic, self.shared.tau)
        soft_update(self.target_actor, self.actor, self.shared.tau)
        return DdpgLosses(critic_loss, actor_value)

    def digest(self) -> str:
        return "".join(net.digest()[:16] for net in (self.critic, self.target_critic, self.actor, self.target_actor))

    def save(self, path: Union[str, Path]) -> Path:
        header = {
            "kind": "ddpg",
            "spec": self.spec.model_dump(mode="json"),
            "config": self.config.model_dump(mode="json"),
            "network": self.network.model_dump(mode="json"),
            "shared": self.shared.model_dump(mode="json"),
            "reward": self.reward.model_dump(mode="json"),
        }
        state = {"header": np.asarray(json.dumps(header, sort_keys=True))}
        for name in ("critic", "target_critic", "actor", "target_actor"):
            state.update(getattr(self, name).state_dict(prefix=f"{name}/"))
        logger.info(f"💾 DDPG checkpoint saved to {path}")
        return save_checkpoint(path, state)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DdpgAgent":
        state = load_checkpoint(path)
        header = json.loads(str(state["header"]))
        agent = cls(EnvSpec.model_validate(header["spec"]), DdpgConfig.model_validate(header["config"]),
                    NetworkConfig.model_validate(header["network"]), GdgConfig.model_validate(header["shared"]),
                    RewardSpec.model_validate(header["reward"]), rng=np.random.default_rng(0))
        for name in ("critic", "target_critic", "actor", "target_actor"):
            setattr(agent, name, Approximator.from_state_dict(state, prefix=f"{name}/"))
        agent._wire()
        return agent


def ddpg_train_step(agent: DdpgAgent, buffer: ReplayBuffer, batch_size: int, reward_spec: RewardSpec) -> DdpgLosses:
    return agent.train_step(buffer, batch_size, reward_spec)

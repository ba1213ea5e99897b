"""
Goal Distance Gradient learner.

The agent keeps four networks: the distance critic D(s, g) with a softplus
head (read back capped at D_max), its target copy D', a residual forward
model f(s, a) and the actor mu(s, g). One ``train_step`` runs, on a single minibatch and in this order:
the TD regression of D, the zero-distance anchor, the model regression, the
actor step that descends D(f(s, mu(s, g)), g), then the soft target update.
"""
import json
import logging
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from app.AI.gdg.functions import DistanceFunction, ForwardModel, LearnedDistance, LearnedModel
from app.AI.gdg.replay import ReplayBuffer, TransitionBatch
from app.AI.numerics.network import (
    Approximator, OutputActivation, load_checkpoint, save_checkpoint, soft_update,
)
from app.AI.numerics.optimizer import OptimizerState, opt_step
from app.AI.policy import ActionBox, StateNormalizer, exploratory_action
from app.core.exceptions import NonFiniteError, PreconditionError
from app.schemas.config import GdgConfig, NetworkConfig
from app.schemas.env import EnvSpec

logger = logging.getLogger(__name__)


class GdgLosses(NamedTuple):
    critic: float
    anchor: float
    model: float
    actor: float


def _finite_loss(value: float, what: str) -> float:
    if not np.isfinite(value):
        raise NonFiniteError(f"{what} loss is not finite")
    return float(value)


def build_actor(spec: EnvSpec, hidden: List[int], rng: np.random.Generator) -> Approximator:
    box = ActionBox(spec)
    return Approximator([2 * spec.state_dim, *hidden, spec.action_dim], OutputActivation.TANH,
                        output_scale=box.half_range, output_offset=box.center, rng=rng)


def actor_inputs(normalizer: StateNormalizer, s, g) -> np.ndarray:
    s, g = np.atleast_2d(s), np.atleast_2d(g)
    return np.concatenate([normalizer.normalize(s), normalizer.normalize(g)], axis=1)


def actor_objective(actor: Approximator, normalizer: StateNormalizer, states, goals,
                    distance: DistanceFunction, model: ForwardModel) -> float:
    """J = mean D(f(s, mu(s, g)), g)."""
    actions = actor.forward(actor_inputs(normalizer, states, goals))
    return float(np.mean(distance.value(model.predict(states, actions), goals)))


def actor_objective_gradient(actor: Approximator, normalizer: StateNormalizer, states, goals,
                             distance: DistanceFunction,
                             model: ForwardModel) -> Tuple[float, List[np.ndarray]]:
    """J and dJ/dtheta_mu with D and f frozen (D input-grad -> f action-grad -> mu param-grad)."""
    x = actor_inputs(normalizer, states, goals)
    actions = actor.forward(x)
    predicted = model.predict(states, actions)
    values = distance.value(predicted, goals)
    upstream = np.full(len(values), 1.0 / len(values))
    d_state = distance.grad_state(predicted, goals, upstream)
    d_action = model.grad_action(states, actions, d_state)
    return float(np.mean(values)), actor.grad_params(x, d_action)


def triangle_violations(distance, states: np.ndarray, slack: float) -> int:
    """Counts triples with D(s, g) > D(s, m) + D(m, g) + slack."""
    states = np.asarray(states)
    n = len(states)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    pair = distance(states[i.ravel()], states[j.ravel()]).reshape(n, n)
    bound = pair[:, :, None] + pair[None, :, :]
    return int(np.sum(pair[:, None, :] > bound + slack))


class GdgAgent:
    def __init__(self, spec: EnvSpec, config: Optional[GdgConfig] = None,
                 network: Optional[NetworkConfig] = None, rng: Optional[np.random.Generator] = None):
        self.spec = spec
        self.config = config or GdgConfig()
        self.network = network or NetworkConfig()
        rng = rng if rng is not None else np.random.default_rng()
        self.rng = rng
        hidden = list(self.network.hidden_sizes)
        sd, ad = spec.state_dim, spec.action_dim

        self.normalizer = StateNormalizer.from_spec(spec)
        self.box = ActionBox(spec)
        self.critic = Approximator([2 * sd, *hidden, 1], OutputActivation.SOFTPLUS, rng=rng)
        self.target_critic = self.critic.copy()
        self.model = Approximator([sd + ad, *hidden, sd], OutputActivation.IDENTITY,
                                  output_scale=spec.step_scale, rng=rng)
        self.actor = build_actor(spec, hidden, rng)
        self.learns_functions = True
        self._wire()

    def _optimizer(self, net: Approximator) -> OptimizerState:
        n = self.network
        return OptimizerState.for_network(net, n.learning_rate, n.beta1, n.beta2, n.epsilon)

    def _wire(self) -> None:
        self.distance: DistanceFunction = LearnedDistance(self.critic, self.normalizer, self.config.d_max)
        self.target_distance = LearnedDistance(self.target_critic, self.normalizer, self.config.d_max)
        self.forward_model: ForwardModel = LearnedModel(self.model, self.normalizer)
        self.critic_optimizer = self._optimizer(self.critic)
        self.model_optimizer = self._optimizer(self.model)
        self.actor_optimizer = self._optimizer(self.actor)

    def use_critic(self, critic: Approximator, learning_rate: Optional[float] = None) -> None:
        """Swap in another critic (and a fresh target copy and optimizer)."""
        self.critic = critic
        self.target_critic = critic.copy()
        self.distance = LearnedDistance(self.critic, self.normalizer, self.config.d_max)
        self.target_distance = LearnedDistance(self.target_critic, self.normalizer, self.config.d_max)
        self.critic_optimizer = self._optimizer(critic)
        if learning_rate is not None:
            self.critic_optimizer.learning_rate = learning_rate

    def use_analytic_functions(self, distance: DistanceFunction, model: ForwardModel) -> None:
        """Freeze D and f to given functions; only the actor keeps learning."""
        self.distance = distance
        self.forward_model = model
        self.learns_functions = False

    # -------------------------------------------------------------- acting
    def policy(self, s, g) -> np.ndarray:
        return self.actor.forward(actor_inputs(self.normalizer, s, g))[0]

    __call__ = policy

    def act(self, s, g, noise_scale: float = 0.0, explore_prob: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = rng if rng is not None else self.rng
        return exploratory_action(self.policy(s, g), self.box, noise_scale, explore_prob, rng)

    # ------------------------------------------------------------ learning
    def td_distance_target(self, batch: TransitionBatch) -> np.ndarray:
        if len(batch) == 0:
            raise PreconditionError("td_distance_target needs a non-empty batch")
        bootstrap = self.target_distance.value(batch.s_next, batch.g)
        targets = batch.d + self.config.gamma_d * np.where(batch.reached, 0.0, bootstrap)
        return np.clip(targets, 0.0, self.config.d_max)

    def critic_update(self, batch: TransitionBatch) -> float:
        targets = self.td_distance_target(batch)
        x = self.distance.inputs(batch.s, batch.g)
        error = self.critic.forward(x)[:, 0] - targets
        loss = _finite_loss(np.mean(error ** 2), "critic")
        grads = self.critic.grad_params(x, (2.0 / len(error)) * error[:, None])
        opt_step(self.critic, grads, self.critic_optimizer)
        return loss

    def anchor_update(self, states: np.ndarray) -> float:
        states = np.atleast_2d(states)
        x = self.distance.inputs(states, states)
        values = self.critic.forward(x)[:, 0]
        loss = _finite_loss(np.mean(values ** 2), "anchor")
        grads = self.critic.grad_params(x, (2.0 / len(values)) * values[:, None])
        opt_step(self.critic, grads, self.critic_optimizer)
        return loss

    def model_update(self, batch: TransitionBatch) -> float:
        x = self.forward_model.inputs(batch.s, batch.a)
        error = self.forward_model.predict(batch.s, batch.a) - batch.s_next
        loss = _finite_loss(np.mean(error ** 2), "model")
        grads = self.model.grad_params(x, (2.0 / error.size) * error)
        opt_step(self.model, grads, self.model_optimizer)
        return loss

    def actor_update(self, batch: TransitionBatch) -> float:
        objective, grads = actor_objective_gradient(
            self.actor, self.normalizer, batch.s, batch.g, self.distance, self.forward_model)
        _finite_loss(objective, "actor")
        opt_step(self.actor, grads, self.actor_optimizer)
        return objective

    def train_step(self, buffer: ReplayBuffer, batch_size: Optional[int] = None) -> GdgLosses:
        batch_size = batch_size or self.config.batch_size
        if len(buffer) < batch_size:
            raise PreconditionError(f"Buffer holds {len(buffer)} items, batch of {batch_size} required")
        batch = buffer.sample(batch_size)
        if not self.learns_functions:
            return GdgLosses(0.0, 0.0, 0.0, self.actor_update(batch))
        losses = GdgLosses(
            critic=self.critic_update(batch),
            anchor=self.anchor_update(batch.s),
            model=self.model_update(batch),
            actor=self.actor_update(batch),
        )
        soft_update(self.target_critic, self.critic, self.config.tau)
        return losses

    # --------------------------------------------------------- persistence
    def digest(self) -> str:
        return "".join(net.digest()[:16] for net in (self.critic, self.target_critic, self.model, self.actor))

    def save(self, path: Union[str, Path]) -> Path:
        header = {
            "kind": "gdg",
            "spec": self.spec.model_dump(mode="json"),
            "config": self.config.model_dump(mode="json"),
            "network": self.network.model_dump(mode="json"),
        }
        state = {"header": np.asarray(json.dumps(header, sort_keys=True))}
        for name in ("critic", "target_critic", "model", "actor"):
            state.update(getattr(self, name).state_dict(prefix=f"{name}/"))
        logger.info(f"💾 GDG checkpoint saved to {path}")
        return save_checkpoint(path, state)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "GdgAgent":
        state = load_checkpoint(path)
        header = json.loads(str(state["header"]))
        agent = cls(EnvSpec.model_validate(header["spec"]), GdgConfig.model_validate(header["config"]),
                    NetworkConfig.model_validate(header["network"]), rng=np.random.default_rng(0))
        for name in ("critic", "target_critic", "model", "actor"):
            setattr(agent, name, Approximator.from_state_dict(state, prefix=f"{name}/"))
        agent._wire()
        return agent

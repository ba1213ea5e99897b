import numpy as np
import pytest

from conftest import chain_spec

from app.AI.baselines import (
    AnalyticQ, DdpgAgent, RandomPolicy, RewardMode, RewardSpec, ddpg_train_step, her_relabel, random_policy,
)
from app.AI.gdg import (
    EpisodeTrace, EuclideanDistance, PointDynamics, ReplayBuffer, TransitionBatch, actor_inputs, episode_transitions,
)
from app.AI.numerics import Approximator, numeric_input_gradient, soft_update
from app.core.exceptions import PreconditionError
from app.envs.maps import make_city
from app.schemas.config import DdpgConfig, GdgConfig, NetworkConfig
from app.services.evaluation_service import evaluate, sample_tasks_at_distance
from app.services.parity_service import greedy_action_agreement


class ConstantQ:
    def __init__(self, value):
        self.constant = value

    def value(self, s, g, a):
        return np.full(len(np.atleast_2d(s)), self.constant)


def small_batch(reached):
    n = len(reached)
    s = np.zeros((n, 2))
    return TransitionBatch(s=s, a=np.zeros((n, 2)), s_next=s + [3.0, 4.0], g=np.zeros((n, 2)),
                           d=np.ones(n), reached=np.asarray(reached))


def test_reward_conventions():
    batch = small_batch([True, False])
    np.testing.assert_array_equal(RewardSpec(mode=RewardMode.SPARSE).rewards(batch), [0.0, -1.0])
    np.testing.assert_allclose(RewardSpec(mode=RewardMode.DENSE_NEGATIVE_DISTANCE).rewards(batch), [-5.0, -5.0])


def test_sparse_targets_truncate_and_clip(four_rooms):
    agent = DdpgAgent(four_rooms.spec, rng=np.random.default_rng(0))
    agent.target_q = ConstantQ(-1000.0)
    targets = agent.critic_targets(small_batch([True, False]))
    np.testing.assert_allclose(targets, [0.0, agent.sparse_floor])
    assert agent.sparse_floor == pytest.approx(-50.0)


def test_tabular_critic_learns_discounted_return():
    states = 10
    agent = DdpgAgent(chain_spec(states), DdpgConfig(gamma=0.98), shared=GdgConfig(tau=0.1),
                      rng=np.random.default_rng(0))
    critic = Approximator([2 * states + 1, 1], rng=np.random.default_rng(1), dtype=np.float64)
    # the action row stays zero because every stored action is zero
    critic.weights[0][-1] = 0.0
    agent.use_critic(critic, learning_rate=1e-2)
    eye = np.eye(states)
    ks = np.arange(1, states)
    batch = TransitionBatch(s=eye[ks], a=np.zeros((len(ks), 1)), s_next=eye[ks - 1],
                            g=np.repeat(eye[:1], len(ks), axis=0), d=np.ones(len(ks)), reached=ks == 1)
    for _ in range(10_000):
        agent.critic_update(batch)
        soft_update(agent.target_critic, agent.critic, agent.shared.tau)
    expected = -(1.0 - 0.98 ** (ks - 1)) / (1.0 - 0.98)
    np.testing.assert_allclose(agent.q.value(batch.s, batch.g, batch.a), expected, atol=0.1)


def test_her_relabels_with_future_states():
    rng = np.random.default_rng(2)
    states = np.cumsum(np.ones((6, 2)), axis=0)
    trace = EpisodeTrace(states, np.ones((5, 2)))
    predicate = lambda s, g: bool(np.linalg.norm(s - g) <= 0.5)
    items = her_relabel(trace, [100.0, 100.0], 4, rng, predicate)
    assert len(items) == 5 * (1 + 4)
    assert all(item.d == 1.0 for item in items)
    for t in range(5):
        original, copies = items[t * 5], items[t * 5 + 1:(t + 1) * 5]
        np.testing.assert_array_equal(original.g, [100.0, 100.0])
        for item in copies:
            future = [j for j in range(t + 1, 6) if np.array_equal(states[j], item.g)]
            assert future
            assert item.reached == predicate(item.s_next, item.g)
    with pytest.raises(PreconditionError):
        her_relabel(trace, [0.0, 0.0], -1, rng, predicate)


def test_her_without_copies_is_plain_storage():
    rng = np.random.default_rng(7)
    trace = EpisodeTrace(rng.uniform(0, 10, size=(8, 2)), rng.uniform(-1, 1, size=(7, 2)))
    predicate = lambda s, g: bool(np.linalg.norm(s - g) <= 1.5)
    relabeled = her_relabel(trace, [5.0, 5.0], 0, rng, predicate)
    plain = episode_transitions(trace, [5.0, 5.0], predicate)
    assert len(relabeled) == len(plain)
    for got, want in zip(relabeled, plain):
        for field in ("s", "a", "s_next", "g"):
            np.testing.assert_array_equal(getattr(got, field), getattr(want, field))
        assert (got.d, got.reached) == (want.d, want.reached)


def test_her_goals_lie_on_the_episode_future():
    rng = np.random.default_rng(8)
    predicate = lambda s, g: bool(np.linalg.norm(s - g) <= 0.5)
    for _ in range(200):
        states = np.cumsum(rng.uniform(-1, 1, size=(51, 2)), axis=0)
        items = her_relabel(EpisodeTrace(states, rng.uniform(-1, 1, size=(50, 2))), [99.0, 99.0], 4, rng, predicate)
        assert len(items) == 250
        for t in range(50):
            for item in items[t * 5 + 1:(t + 1) * 5]:
                assert any(np.array_equal(item.g, future) for future in states[t + 1:])
                if np.array_equal(item.g, item.s_next):
                    assert item.reached


def test_ddpg_train_step_on_relabeled_episode(four_rooms):
    rng = np.random.default_rng(9)
    agent = DdpgAgent(four_rooms.spec, network=NetworkConfig(hidden_sizes=[16]), rng=rng)
    buffer = ReplayBuffer(1000, 2, 2, rng=rng)
    sparse = RewardSpec(mode=RewardMode.SPARSE)
    with pytest.raises(PreconditionError):
        ddpg_train_step(agent, buffer, 16, sparse)
    state = four_rooms.reset(rng)
    states, actions = [state.position], []
    for _ in range(30):
        action = agent.act(state.position, state.goal, 0.2, 0.1, rng)
        state, _ = four_rooms.step(state, action)
        states.append(state.position)
        actions.append(action)
    trace = EpisodeTrace(np.array(states), np.array(actions))
    assert buffer.extend(her_relabel(trace, state.goal, 4, rng, four_rooms.goal_reached)) == 150
    before = agent.digest()
    losses = ddpg_train_step(agent, buffer, 16, sparse)
    assert np.isfinite(losses.critic) and np.isfinite(losses.actor)
    assert agent.digest() != before
    assert np.all(agent.critic_targets(buffer.snapshot(), sparse) >= agent.sparse_floor)


def test_analytic_q_action_gradient(reach3d):
    q = AnalyticQ(EuclideanDistance(), PointDynamics(reach3d.spec.step_scale))
    s, g, a = np.array([[0.1, -0.2, 0.3]]), np.array([[0.5, 0.5, -0.5]]), np.array([[0.2, 0.1, -0.4]])
    analytic = q.grad_action(s, g, a, np.ones(1))
    numeric = numeric_input_gradient(lambda v: float(q.value(s, g, v.reshape(1, 3))[0]), a.reshape(-1))
    np.testing.assert_allclose(analytic.reshape(-1), numeric, rtol=1e-5, atol=1e-8)


def test_greedy_actions_agree_on_reach(reach3d):
    assert greedy_action_agreement(reach3d, pairs=100, grid_points=5) == 1.0


def test_analytic_ddpg_actor_heads_to_goal(reach3d):
    rng = np.random.default_rng(3)
    agent = DdpgAgent(reach3d.spec, network=NetworkConfig(hidden_sizes=[32], learning_rate=1e-2),
                      shared=GdgConfig(batch_size=64), rng=rng)
    q = AnalyticQ(EuclideanDistance(), PointDynamics(reach3d.spec.step_scale))
    agent.use_analytic_critic(q)
    buffer = ReplayBuffer(1000, 3, 3, rng=rng)
    for _ in range(200):
        trace = EpisodeTrace(rng.uniform(-1, 1, size=(4, 3)), np.zeros((3, 3)))
        buffer.extend(episode_transitions(trace, rng.uniform(-1, 1, 3), reach3d.goal_reached))
    fixed = buffer.snapshot()

    def mean_value():
        actions = agent.actor.forward(actor_inputs(agent.normalizer, fixed.s, fixed.g))
        return float(np.mean(q.value(fixed.s, fixed.g, actions)))

    before = mean_value()
    for _ in range(300):
        agent.train_step(buffer)
    assert mean_value() > before + 0.05


def test_checkpoint_round_trip(tmp_path, four_rooms):
    agent = DdpgAgent(four_rooms.spec, network=NetworkConfig(hidden_sizes=[8]),
                      reward=RewardSpec(mode=RewardMode.DENSE_NEGATIVE_DISTANCE), rng=np.random.default_rng(4))
    restored = DdpgAgent.load(agent.save(tmp_path / "ddpg.npz"))
    assert restored.digest() == agent.digest()
    assert restored.reward.mode == RewardMode.DENSE_NEGATIVE_DISTANCE


def test_noisy_act_without_rng(four_rooms):
    agent = DdpgAgent(four_rooms.spec, network=NetworkConfig(hidden_sizes=[8]), rng=np.random.default_rng(5))
    low, high = four_rooms.spec.action_bounds()
    action = agent.act([5.5, 5.5], [50.5, 50.5], noise_scale=0.3, explore_prob=0.5)
    assert np.all(action >= low) and np.all(action <= high)


def test_random_policy_stays_in_box(four_rooms):
    policy = RandomPolicy(four_rooms, np.random.default_rng(5))
    actions = np.array([policy(None, None) for _ in range(10_000)])
    assert np.all(actions >= -1.0) and np.all(actions <= 1.0)
    np.testing.assert_allclose(actions.mean(axis=0), 0.0, atol=0.05)
    np.testing.assert_allclose(actions.std(axis=0), 2.0 / np.sqrt(12.0), rtol=0.05)
    again = RandomPolicy(four_rooms, np.random.default_rng(5))
    np.testing.assert_array_equal([again(None, None) for _ in range(10)], actions[:10])
    np.testing.assert_array_equal(random_policy(four_rooms, np.random.default_rng(5)), actions[0])


def test_random_policy_floor_on_long_city_tasks():
    city = make_city()
    rng = np.random.default_rng(6)
    tasks = sample_tasks_at_distance(city, 200, 10, rng)
    assert len(tasks) == 10
    result = evaluate(RandomPolicy(city, rng), city, tasks, city.spec.horizon)
    assert result.success_rate <= 0.05


@pytest.mark.slow
def test_her_relabeling_over_many_episodes():
    rng = np.random.default_rng(20)
    predicate = lambda s, g: bool(np.linalg.norm(s - g) <= 0.5)
    for _ in range(10_000):
        steps = int(rng.integers(1, 21))
        states = np.cumsum(rng.uniform(-1, 1, size=(steps + 1, 2)), axis=0)
        trace = EpisodeTrace(states, rng.uniform(-1, 1, size=(steps, 2)))
        assert len(her_relabel(trace, [99.0, 99.0], 0, rng, predicate)) == steps
        items = her_relabel(trace, [99.0, 99.0], 4, rng, predicate)
        assert len(items) == 5 * steps
        for t in range(steps):
            for item in items[t * 5 + 1:(t + 1) * 5]:
                assert np.any(np.all(states[t + 1:] == item.g, axis=1))
                assert item.reached == predicate(item.s_next, item.g)

import json

import numpy as np
import pandas as pd
import pytest

from app.AI.gdg import GdgAgent, PointDynamics
from app.core.exceptions import ConfigurationError, PreconditionError
from app.core.presets import PRESETS, RUNTIME_LIMITS, estimated_update_seconds, preset_config
from app.envs.maps import make_four_rooms
from app.schemas.config import Method, NetworkConfig, RunConfig
from app.services.evaluation_service import distance_bucket_eval, evaluate, sample_tasks_at_distance
from app.services.experiment_service import CHECKPOINT_NAME, CONFIG_NAME, LoadedRun, run_experiment, run_many
from app.services.metrics_service import CURVE_COLUMNS, config_hash, emit_metrics, load_manifest, load_reports
from app.services.training_service import TrainingService, run_training, spawn_rngs


def tiny_config(**overrides) -> RunConfig:
    base = {
        "method": "gdg", "env": "four_rooms", "episodes": 4, "horizon": 20, "eval_every": 2, "eval_tasks": 3,
        "eval_budget": 30, "updates_per_episode": 2, "network.hidden_sizes": [8], "gdg.batch_size": 16,
        "gdg.buffer_capacity": 10_000,
    }
    return RunConfig().with_overrides({**base, **overrides})


class NanDistance:
    def value(self, s, g):
        return np.full(len(np.atleast_2d(s)), np.nan)

    def grad_state(self, s, g, upstream):
        return np.full(np.atleast_2d(s).shape, np.nan)


def test_rng_streams_are_reproducible_and_distinct():
    first, second = spawn_rngs(3), spawn_rngs(3)
    draws = {name: rng.random() for name, rng in first.items()}
    assert draws == {name: rng.random() for name, rng in second.items()}
    assert len(set(draws.values())) == len(draws)


@pytest.mark.parametrize("method", ["gdg", "ddpg_sparse", "her"])
def test_same_seed_same_run(method):
    results = [run_training(tiny_config(method=method, seed=5)) for _ in range(2)]
    assert results[0].runner.digest() == results[1].runner.digest()
    assert results[0].report.series == results[1].report.series
    assert len(results[0].report.series) == 2
    other = run_training(tiny_config(method=method, seed=6))
    assert other.runner.digest() != results[0].runner.digest()


def test_bridge_fraction_tracks_epsilon():
    config = tiny_config(method="gdg_bridge", episodes=1000, horizon=2, eval_every=1000, eval_tasks=1,
                         eval_budget=1, updates_per_episode=0, epsilon_bridge=0.4)
    report = run_training(config).report
    assert 0.35 <= report.bridge_fraction <= 0.45
    never = run_training(tiny_config(method="gdg_bridge", episodes=50, epsilon_bridge=0.0)).report
    assert never.bridge_episodes == 0


def test_non_finite_update_aborts_run():
    service = TrainingService(tiny_config(episodes=6, updates_per_episode=1))
    service.runner.agent.use_analytic_functions(NanDistance(), PointDynamics(1.0))
    report = service.run().report
    assert report.aborted
    assert report.diagnostic.startswith("NonFiniteError")


def test_random_run_curve():
    report = run_training(tiny_config(method="random", episodes=6)).report
    assert [p.episodes_trained for p in report.series] == [2, 4, 6]
    assert not report.aborted


def test_evaluation_contract(four_rooms):
    with pytest.raises(PreconditionError):
        evaluate(lambda s, g: np.zeros(2), four_rooms, [(np.array([5.5, 5.5]), np.array([9.5, 9.5]))], 0)
    result = evaluate(lambda s, g: np.zeros(2), four_rooms, [(np.array([5.5, 5.5]), np.array([6.5, 5.5]))], 10)
    assert result.success_rate == 1.0
    assert result.outcomes[0].steps == 0


def test_evaluation_leaves_agent_untouched(four_rooms):
    agent = GdgAgent(four_rooms.spec, network=NetworkConfig(hidden_sizes=[8]), rng=np.random.default_rng(3))
    before = agent.digest()
    tasks = sample_tasks_at_distance(four_rooms, 20, 3, np.random.default_rng(4))
    evaluate(agent.policy, four_rooms, tasks, 30)
    assert agent.digest() == before


def test_bucket_tasks_match_requested_distance(four_rooms):
    tasks = sample_tasks_at_distance(four_rooms, 20, 10, np.random.default_rng(0))
    assert len(tasks) == 10
    for start, goal in tasks:
        assert 19 <= four_rooms.bfs_distance(four_rooms.cell_of(start), four_rooms.cell_of(goal)) <= 21


def test_unsatisfiable_bucket_is_flagged(four_rooms):
    policy = lambda s, g: np.clip(g - s, -1, 1)
    table = distance_bucket_eval(policy, four_rooms, [20, 10_000], 4, seeds=[0, 1], budget=50)
    assert len(table.rows) == 4
    assert table.unsatisfiable == [10_000]
    assert [s.satisfiable for s in table.summary] == [True, False]
    assert table.summary[0].minimum <= table.summary[0].mean <= table.summary[0].maximum


def test_emit_metrics_outputs(tmp_path):
    config = tiny_config(method="random", episodes=4, bucket_distances=[20], bucket_tasks=2)
    result = run_training(config)
    files = emit_metrics(result.report, tmp_path, result.config, result.trajectories)
    curves = pd.read_csv(files["curves"])
    assert list(curves.columns) == CURVE_COLUMNS
    assert list(curves["episodes"]) == [2, 4]
    assert len(pd.read_csv(files["buckets"])) == 1
    manifest = load_manifest(tmp_path)
    assert manifest.config_hash == config_hash(result.config)
    assert "curves.csv" in manifest.files
    assert load_reports(tmp_path)[0].series == result.report.series


def test_run_directory_can_be_reloaded(tmp_path):
    config = tiny_config(method="gdg_bridge", seed=2)
    report = run_experiment(config, tmp_path)
    run_dir = tmp_path / config.run_name
    assert (run_dir / CHECKPOINT_NAME).exists() and (run_dir / CONFIG_NAME).exists()
    loaded = LoadedRun(run_dir)
    assert loaded.config.method == Method.GDG_BRIDGE
    result = evaluate(loaded.policy(np.random.default_rng(0)), loaded.env,
                      [(np.array([5.5, 5.5]), np.array([15.5, 15.5]))], 5)
    assert 0.0 <= result.success_rate <= 1.0
    assert not report.aborted


def test_run_many_aggregates(tmp_path):
    configs = [tiny_config(method="random", seed=seed) for seed in (0, 1)]
    reports = run_many(configs, tmp_path, workers=1)
    assert [r.seed for r in reports] == [0, 1]
    assert set(pd.read_csv(tmp_path / "curves.csv")["seed"]) == {0, 1}
    stored = json.loads((tmp_path / "random_four_rooms_seed1" / "manifest.json").read_text(encoding="utf-8"))
    assert stored["seed"] == 1


def test_presets_and_overrides():
    assert set(PRESETS) >= {"fourrooms-desk", "city-desk", "trap", "reach3d-parity"}
    config = preset_config("trap", **{"gdg.tau": 0.1, "episodes": None})
    assert config.gdg.tau == 0.1
    assert config.episodes == PRESETS["trap"]["episodes"]
    assert config.preset == "trap"
    with pytest.raises(ConfigurationError):
        preset_config("nope")
    resolved = RunConfig().resolved(make_four_rooms().spec)
    assert (resolved.horizon, resolved.eval_budget, resolved.planner.reach_radius) == (200, 500, 1.5)


@pytest.mark.parametrize("name", sorted(RUNTIME_LIMITS))
def test_timed_presets_leave_room_for_rollouts(name):
    # updates may take at most 80% of the limit; rollouts and evaluation share the rest
    estimate = estimated_update_seconds(preset_config(name))
    assert estimate is not None
    assert estimate <= 0.8 * RUNTIME_LIMITS[name]
    assert estimated_update_seconds(preset_config("city")) is None


def test_config_hash_follows_content(tmp_path):
    config = tiny_config(seed=3)
    reread = RunConfig.from_file(config.to_file(tmp_path / "config.json"))
    assert reread == config
    assert config_hash(reread) == config_hash(config)
    assert config_hash(config.with_overrides({"gdg.tau": 0.2})) != config_hash(config)
    assert config_hash(config.with_overrides({"seed": 4})) != config_hash(config)

"""
Command-line surface of the experiment harness.

    python -m app.cli train --preset city-desk --method gdg_bridge --seeds 0,1,2
    python -m app.cli eval --run-dir runs/gdg_bridge_city_desk_seed0
    python -m app.cli buckets --run-dir runs/gdg_city_desk_seed0 --run-dir runs/gdg_city_desk_seed1
    python -m app.cli render --run-dir runs/gdg_bridge_city_desk_seed0
    python -m app.cli verify-gradients
    python -m app.cli calibrate-maps
"""
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.exceptions import GdgError
from app.core.logging_config import configure_logging
from app.core.presets import PRESETS, preset_config
from app.envs.maps import ENV_FACTORIES, calibrate, make_reach3d
from app.schemas.config import EnvName, Method, RunConfig
from app.schemas.report import EvalReport
from app.services.evaluation_service import (
    distance_bucket_eval, distance_calibration, evaluate, sample_tasks, sample_tasks_at_distance,
)
from app.services.experiment_service import LoadedRun, run_many
from app.services.metrics_service import buckets_frame, write_trajectories
from app.services.parity_service import greedy_action_agreement, run_parity
from app.services.render_service import render_buckets, render_curves, render_trajectories
from app.services.verification_service import verify_gradients

logger = logging.getLogger(__name__)


def _int_list(value: Optional[str]) -> List[int]:
    return [int(v) for v in value.split(",") if v.strip()] if value else []


@click.group()
@click.option("--log-level", default=None, help="Overrides LOG_LEVEL.")
def cli(log_level: Optional[str]):
    """Goal-distance-gradient experiments."""
    configure_logging(log_level)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON RunConfig file.")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option("--method", type=click.Choice([m.value for m in Method]), default=None)
@click.option("--env", "env_name", type=click.Choice([e.value for e in EnvName]), default=None)
@click.option("--seeds", default=None, help="Comma-separated seeds, e.g. 0,1,2.")
@click.option("--episodes", type=int, default=None)
@click.option("--eval-every", type=int, default=None)
@click.option("--eval-tasks", type=int, default=None)
@click.option("--epsilon-bridge", type=float, default=None)
@click.option("--out-dir", default=None, help="Defaults to RUNS_DIR.")
@click.option("--workers", type=int, default=None)
def train(config_path, preset, method, env_name, seeds, episodes, eval_every, eval_tasks, epsilon_bridge,
          out_dir, workers):
    """Train one method over one or more seeds."""
    overrides = {"method": method, "env": env_name, "episodes": episodes, "eval_every": eval_every,
                 "eval_tasks": eval_tasks, "epsilon_bridge": epsilon_bridge}
    # an explicit config file wins over --preset
    base = RunConfig.from_file(config_path) if config_path else preset_config(preset)
    base = base.with_overrides(overrides)
    seed_list = _int_list(seeds) or [base.seed]
    configs = [base.model_copy(update={"seed": seed}) for seed in seed_list]
    reports = run_many(configs, out_dir, workers)
    for report in reports:
        status = "ABORTED " + (report.diagnostic or "") if report.aborted else f"success={report.final_success_rate}"
        click.echo(f"{report.method} {report.env} seed={report.seed}: {status}")
    if any(r.aborted for r in reports):
        sys.exit(1)


@cli.command("eval")
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tasks", type=int, default=None, help="Defaults to the run's eval_tasks.")
@click.option("--seed", type=int, default=None)
def eval_command(run_dir, tasks, seed):
    """Greedy evaluation of a stored run."""
    run = LoadedRun(run_dir)
    seed = run.config.seed if seed is None else seed
    task_list = sample_tasks(run.env, tasks or run.config.eval_tasks, np.random.default_rng(seed))
    result = evaluate(run.policy(np.random.default_rng([seed, 1])), run.env, task_list, run.config.eval_budget)
    summary = {"success_rate": result.success_rate, "mean_final_distance": result.mean_final_distance,
               "tasks": len(task_list)}
    if run.config.method in (Method.GDG, Method.GDG_BRIDGE) and run.env.grid is not None and len(task_list) > 1:
        starts, goals = (np.array(column) for column in zip(*task_list))
        summary["distance_calibration"] = asdict(distance_calibration(run.agent.distance, run.env, starts, goals))
    click.echo(json.dumps(summary))


@cli.command()
@click.option("--run-dir", "run_dirs", multiple=True, required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--distances", default=None, help="Comma-separated BFS distances; defaults to the run config.")
@click.option("--tasks-per-bucket", type=int, default=100)
@click.option("--out-dir", default=None, help="Defaults to the parent of the first run directory.")
def buckets(run_dirs, distances, tasks_per_bucket, out_dir):
    """Success per BFS-distance bucket, one trained agent per seed."""
    runs = [LoadedRun(d) for d in run_dirs]
    by_method = {}
    for run in runs:
        by_method.setdefault(run.config.method.value, []).append(run)
    reports = []
    for method, items in by_method.items():
        env = items[0].env
        targets = _int_list(distances) or items[0].config.bucket_distances
        if not targets:
            raise click.UsageError("No distances given and none stored in the run config")
        policies = {run.config.seed: run.policy(np.random.default_rng([run.config.seed, 2])) for run in items}
        table = distance_bucket_eval(policies, env, targets, tasks_per_bucket, sorted(policies))
        for seed in sorted(policies):
            reports.append(EvalReport(method=method, env=env.name, seed=seed,
                                      buckets=[row for row in table.rows if row.seed == seed]))
        for row in table.summary:
            click.echo(f"{method} d={row.distance}: mean={row.mean} band=[{row.minimum}, {row.maximum}]"
                       + ("" if row.satisfiable else " UNSATISFIABLE"))
    out = Path(out_dir or Path(run_dirs[0]).parent)
    out.mkdir(parents=True, exist_ok=True)
    frame = buckets_frame(reports)
    frame.to_csv(out / "buckets.csv", index=False)
    render_buckets(frame, out / "buckets.png")


@cli.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tasks", type=int, default=4)
@click.option("--distances", default=None, help="Render tasks at these BFS distances instead of random tasks.")
@click.option("--seed", type=int, default=0)
def render(run_dir, tasks, distances, seed):
    """Trajectory files and plots for a stored run."""
    run = LoadedRun(run_dir)
    rng = np.random.default_rng(seed)
    targets = _int_list(distances)
    if targets:
        task_list = [t for d in targets for t in sample_tasks_at_distance(run.env, d, 1, rng)]
    else:
        task_list = sample_tasks(run.env, tasks, rng)
    policy = run.policy(np.random.default_rng([seed, 3]))
    result = evaluate(policy, run.env, task_list, run.config.eval_budget, record_trajectories=True)
    out = Path(run_dir)
    write_trajectories(result.trajectories, out)
    plans = getattr(policy, "plans", None)
    if run.env.spec.state_dim == 2:
        render_trajectories(run.env, result.trajectories, out / "trajectories.png", plans,
                            title=f"{run.config.method.value} on {run.env.name}")
    curves = out / "curves.csv"
    if curves.exists():
        render_curves(pd.read_csv(curves), out / "curves.png")
    click.echo(f"Rendered {len(task_list)} tasks into {out}")


@cli.command("verify-gradients")
@click.option("--networks", type=int, default=20)
@click.option("--seed", type=int, default=None)
def verify_gradients_command(networks, seed):
    """Finite-difference check of parameter, input and composite actor gradients."""
    report = verify_gradients(networks, settings.DEFAULT_SEED if seed is None else seed)
    click.echo(report.model_dump_json(indent=2))
    if not report.passed:
        sys.exit(1)


@cli.command("calibrate-maps")
def calibrate_maps():
    """Max BFS distance of each grid map and the trap hop counts."""
    for name in ENV_FACTORIES:
        if name == EnvName.REACH3D:
            continue
        click.echo(calibrate(name).model_dump_json())


@cli.command()
@click.option("--seeds", default="0,1,2")
@click.option("--episodes", type=int, default=None)
@click.option("--pairs", type=int, default=1000)
@click.option("--out-dir", default=None)
@click.option("--workers", type=int, default=None)
@click.option("--skip-training", is_flag=True, default=False)
def parity(seeds, episodes, pairs, out_dir, workers, skip_training):
    """Analytic GDG vs DDPG parity on Reach3D."""
    agreement = greedy_action_agreement(make_reach3d(), pairs)
    click.echo(f"greedy action agreement: {agreement:.4f}")
    if not skip_training:
        grouped = run_parity(_int_list(seeds), out_dir or str(Path(settings.RUNS_DIR) / "parity"), episodes, workers)
        for method, reports in grouped.items():
            click.echo(f"{method}: " + ", ".join(f"{r.final_success_rate}" for r in reports))
    if agreement < 1.0:
        sys.exit(1)


def main():
    try:
        cli(standalone_mode=True)
    except GdgError as exc:
        logger.error(f"❌ {exc}")
        sys.exit(2)


if __name__ == "__main__":
    main()

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from app.envs.base import PointEnv  # noqa: E402
from app.schemas.plan import BridgePlan  # noqa: E402

logger = logging.getLogger(__name__)


def render_trajectories(env: PointEnv, trajectories: Sequence[np.ndarray], out_path: Union[str, Path],
                        plans: Optional[Sequence[BridgePlan]] = None, title: str = "") -> Path:
    """Walls, rollouts, start/goal markers and bridge waypoints on one map."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 6 * (env.high[1] - env.low[1]) / (env.high[0] - env.low[0])))
    for wall in env.walls:
        ax.add_patch(Rectangle((wall.x_min, wall.y_min), wall.x_max - wall.x_min, wall.y_max - wall.y_min,
                               color="0.25"))
    palette = sns.color_palette("husl", max(len(trajectories), 1))
    for i, path in enumerate(trajectories):
        path = np.asarray(path)
        ax.plot(path[:, 0], path[:, 1], color=palette[i], linewidth=1.2)
        ax.scatter(*path[0, :2], color=palette[i], marker="o", s=25)
        ax.scatter(*path[-1, :2], color=palette[i], marker="x", s=25)
        if plans and i < len(plans) and plans[i].waypoints:
            wp = np.asarray(plans[i].waypoints)
            ax.scatter(wp[:, 0], wp[:, 1], color=palette[i], marker="*", s=80, edgecolors="k")
    ax.set_xlim(env.low[0], env.high[0])
    ax.set_ylim(env.low[1], env.high[1])
    ax.set_aspect("equal")
    ax.set_title(title or env.name)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    logger.info(f"🖼️ Trajectories rendered to {out_path}")
    return out_path


def render_curves(curves: pd.DataFrame, out_path: Union[str, Path], metric: str = "success_rate") -> Path:
    """Mean curve per method with the min/max band across seeds."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    sns.lineplot(data=curves, x="episodes", y=metric, hue="method", errorbar=("pi", 100), ax=ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def render_buckets(buckets: pd.DataFrame, out_path: Union[str, Path]) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    sns.lineplot(data=buckets.dropna(subset=["success_rate"]), x="distance", y="success_rate", hue="method",
                 errorbar=("pi", 100), marker="o", ax=ax)
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path

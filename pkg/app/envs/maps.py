"""
Map assets and environment factories.

Map files hold the world bounds on the first non-comment line and one wall
rectangle ``x_min y_min x_max y_max`` per following line; ``#`` starts a comment.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple, Union

from app.core.config import settings
from app.core.exceptions import ConfigurationError
from app.envs.base import PointEnv
from app.schemas.config import EnvName
from app.schemas.env import EnvSpec, MapCalibration, Wall

logger = logging.getLogger(__name__)

PACKAGED_MAPS = Path(__file__).parent / "maps"

# Trap landmarks, in cells
TRAP_START = (20, 21)
TRAP_GOAL = (20, 37)
TRAP_INTERIOR = (20, 29)


def maps_dir() -> Path:
    return Path(settings.MAPS_DIR) if settings.MAPS_DIR else PACKAGED_MAPS


def parse_map(text: str, source: str = "<map>") -> Tuple[List[float], List[float], List[Wall]]:
    rows = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values = [float(v) for v in line.split()]
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{number}: not a number ({exc})") from exc
        if len(values) != 4:
            raise ConfigurationError(f"{source}:{number}: expected 4 numbers, got {len(values)}")
        rows.append((number, values))
    if not rows:
        raise ConfigurationError(f"{source}: missing world bounds")
    _, bounds = rows[0]
    walls = []
    for number, values in rows[1:]:
        try:
            walls.append(Wall(x_min=values[0], y_min=values[1], x_max=values[2], y_max=values[3]))
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{number}: {exc}") from exc
    return bounds[:2], bounds[2:], walls


def load_map(name_or_path: Union[str, Path]) -> Tuple[List[float], List[float], List[Wall]]:
    path = Path(name_or_path)
    if not path.suffix:
        path = maps_dir() / f"{name_or_path}.map"
    if not path.exists():
        raise ConfigurationError(f"Map file not found: {path}")
    return parse_map(path.read_text(encoding="utf-8"), str(path))


def _maze(map_name: str, train_horizon: int, **kwargs) -> PointEnv:
    low, high, walls = load_map(map_name)
    spec = EnvSpec(
        name=map_name, state_dim=2, action_dim=2,
        action_low=[-1.0, -1.0], action_high=[1.0, 1.0],
        observation_low=low, observation_high=high,
        goal_radius=1.5, step_scale=1.0, horizon=500, train_horizon=train_horizon,
    )
    return PointEnv(spec, walls, **kwargs)


def make_four_rooms() -> PointEnv:
    return _maze("four_rooms", train_horizon=200)


def make_city() -> PointEnv:
    return _maze("city", train_horizon=300)


def make_city_desk() -> PointEnv:
    return _maze("city_desk", train_horizon=300)


def make_trap() -> PointEnv:
    env = _maze("trap", train_horizon=200, landmarks={
        "start": TRAP_START, "goal": TRAP_GOAL, "trap": TRAP_INTERIOR})
    env.fixed_task = (env.cell_center(TRAP_START), env.cell_center(TRAP_GOAL))
    return env


def make_reach3d() -> PointEnv:
    spec = EnvSpec(
        name="reach3d", state_dim=3, action_dim=3,
        action_low=[-1.0] * 3, action_high=[1.0] * 3,
        observation_low=[-1.0] * 3, observation_high=[1.0] * 3,
        goal_radius=0.1, step_scale=0.1, horizon=60, train_horizon=60,
    )
    return PointEnv(spec)


ENV_FACTORIES: Dict[EnvName, Callable[[], PointEnv]] = {
    EnvName.FOUR_ROOMS: make_four_rooms,
    EnvName.CITY: make_city,
    EnvName.CITY_DESK: make_city_desk,
    EnvName.TRAP: make_trap,
    EnvName.REACH3D: make_reach3d,
}


def make_env(name: Union[EnvName, str]) -> PointEnv:
    try:
        return ENV_FACTORIES[EnvName(name)]()
    except ValueError as exc:
        raise ConfigurationError(f"Unknown environment: {name}") from exc


def calibrate(name: Union[EnvName, str]) -> MapCalibration:
    """Hop-count facts of a grid map (max distance; trap start/goal/interior hops)."""
    env = make_env(name)
    if env.grid is None:
        return MapCalibration(name=env.name, free_cells=0)
    report = MapCalibration(name=env.name, free_cells=int(env.grid.free.sum()),
                            max_bfs_distance=env.max_bfs_distance())
    if {"start", "goal", "trap"} <= env.landmarks.keys():
        report.start_to_trap = int(env.bfs_distance(env.landmarks["start"], env.landmarks["trap"]))
        report.start_to_goal = int(env.bfs_distance(env.landmarks["start"], env.landmarks["goal"]))
    logger.info(f"🗺️ {env.name}: max BFS distance {report.max_bfs_distance}")
    return report

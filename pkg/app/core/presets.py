"""
Named experiment presets.

Desk presets shrink episode counts and per-episode updates so one (method, seed)
run fits a desk budget; evaluation keeps the 100-tests-per-2k-episodes cadence.
Updates dominate the cost: at about 3 ms per train_step, city-desk spends
roughly 10 minutes on its 192k updates.
"""
from typing import Any, Dict, Optional

from app.core.exceptions import ConfigurationError
from app.schemas.config import RunConfig

PRESETS: Dict[str, Dict[str, Any]] = {
    "fourrooms-desk": {
        "env": "four_rooms", "episodes": 6000, "eval_every": 500, "eval_tasks": 100,
        "updates_per_episode": 40, "bucket_distances": [20, 40, 60, 80, 100, 120],
    },
    "city-desk": {
        "env": "city_desk", "episodes": 12000, "eval_every": 2000, "eval_tasks": 100,
        "updates_per_episode": 16, "bucket_distances": [45, 60, 75, 90, 105, 120],
    },
    "city": {
        "env": "city", "episodes": 200000, "eval_every": 20000, "eval_tasks": 200,
        "bucket_distances": [90, 120, 150, 180, 210, 240],
    },
    "trap": {
        "env": "trap", "episodes": 3000, "eval_every": 100, "eval_tasks": 1,
        "updates_per_episode": 40, "noise_scale": 0.3,
    },
    "reach3d-parity": {
        "env": "reach3d", "episodes": 400, "eval_every": 50, "eval_tasks": 100,
        "analytic": True, "updates_per_episode": 20, "explore_prob": 0.0,
    },
}


def preset_config(name: Optional[str], **overrides: Any) -> RunConfig:
    """RunConfig from a preset name (or defaults) plus dotted-key overrides."""
    data: Dict[str, Any] = {}
    if name:
        if name not in PRESETS:
            raise ConfigurationError(f"Unknown preset '{name}'. Available: {', '.join(sorted(PRESETS))}")
        data = {**PRESETS[name], "preset": name}
    return RunConfig.model_validate(data).with_overrides(overrides)


# seconds; approximate train_step cost on city_desk with the default network
SECONDS_PER_TRAIN_STEP = 3e-3
RUNTIME_LIMITS = {"city-desk": 15 * 60, "trap": 10 * 60, "reach3d-parity": 5 * 60}


def estimated_update_seconds(config: RunConfig) -> Optional[float]:
    """Wall time of the updates alone; None when updates follow episode length."""
    if config.updates_per_episode is None:
        return None
    return config.episodes * config.updates_per_episode * SECONDS_PER_TRAIN_STEP

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

from app.schemas.env import EnvSpec
from app.schemas.plan import CandidateMode


class Method(str, Enum):
    GDG = "gdg"
    GDG_BRIDGE = "gdg_bridge"
    DDPG_SPARSE = "ddpg_sparse"
    DDPG_DENSE = "ddpg_dense"
    HER = "her"
    RANDOM = "random"


class EnvName(str, Enum):
    FOUR_ROOMS = "four_rooms"
    CITY = "city"
    CITY_DESK = "city_desk"
    TRAP = "trap"
    REACH3D = "reach3d"


class NetworkConfig(BaseModel):
    hidden_sizes: List[int] = Field(default_factory=lambda: [64, 64])
    learning_rate: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)


class GdgConfig(BaseModel):
    tau: float = Field(0.05, ge=0, le=1)
    gamma_d: float = Field(1.0, ge=0, le=1)
    d_max: float = Field(500.0, gt=0)
    batch_size: int = Field(128, ge=1)
    buffer_capacity: int = Field(1_000_000, ge=1)


class PlannerConfig(BaseModel):
    candidate_mode: CandidateMode = CandidateMode.REPLAY_STATES
    candidate_budget: int = Field(64, ge=0)
    margin: float = Field(2.0, gt=0)
    depth: int = Field(2, ge=1)
    reach_radius: Optional[float] = Field(None, gt=0, description="None = environment goal radius")


class DdpgConfig(BaseModel):
    gamma: float = Field(0.98, ge=0, lt=1)
    her_k_future: int = Field(4, ge=0)


class RunConfig(BaseModel):
    """Declarative description of one training run."""
    method: Method = Method.GDG
    env: EnvName = EnvName.FOUR_ROOMS
    episodes: int = Field(2000, ge=1)
    horizon: Optional[int] = Field(None, ge=1, description="None = environment train horizon")
    seed: int = 0
    epsilon_bridge: float = Field(0.4, ge=0, le=1)
    noise_scale: float = Field(0.2, ge=0)
    explore_prob: float = Field(0.1, ge=0, le=1)
    eval_every: int = Field(200, ge=1)
    eval_tasks: int = Field(100, ge=1)
    eval_budget: Optional[int] = Field(None, ge=1, description="None = environment horizon")
    updates_per_episode: Optional[int] = Field(None, ge=0, description="None = episode length")
    bucket_distances: List[int] = Field(default_factory=list)
    bucket_tasks: int = Field(100, ge=1)
    render_tasks: int = Field(4, ge=0)
    analytic: bool = False
    preset: Optional[str] = None
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    gdg: GdgConfig = Field(default_factory=GdgConfig)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    ddpg: DdpgConfig = Field(default_factory=DdpgConfig)

    def resolved(self, spec: EnvSpec) -> "RunConfig":
        """Copy with every optional field filled from the environment spec."""
        planner = self.planner.model_copy(
            update={"reach_radius": self.planner.reach_radius or spec.goal_radius})
        return self.model_copy(update={
            "horizon": self.horizon or spec.train_horizon,
            "eval_budget": self.eval_budget or spec.horizon,
            "planner": planner,
        })

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        """Apply dotted-key overrides (e.g. ``gdg.tau``), ignoring None values."""
        data = self.model_dump(mode="json")
        for key, value in overrides.items():
            if value is None:
                continue
            node = data
            parts = key.split(".")
            for part in parts[:-1]:
                node = node[part]
            node[parts[-1]] = value
        return RunConfig.model_validate(data)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def to_file(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    @property
    def run_name(self) -> str:
        return f"{self.method.value}_{self.env.value}_seed{self.seed}"

from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class TaskOutcome(BaseModel):
    start: List[float]
    goal: List[float]
    success: bool
    steps: int
    final_distance: float


class EvalPoint(BaseModel):
    episodes_trained: int
    success_rate: float = Field(..., ge=0.0, le=1.0)
    mean_final_distance: float
    successes: int
    tasks: int


class BucketRow(BaseModel):
    distance: int
    seed: int
    success_rate: Optional[float] = Field(None, ge=0.0, le=1.0)
    tasks: int = 0
    satisfiable: bool = True


class BucketSummary(BaseModel):
    """Mean over seeds with the min/max band."""
    distance: int
    mean: Optional[float] = None
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    seeds: int = 0
    satisfiable: bool = True


class BucketTable(BaseModel):
    rows: List[BucketRow] = Field(default_factory=list)
    summary: List[BucketSummary] = Field(default_factory=list)

    @property
    def unsatisfiable(self) -> List[int]:
        return sorted({row.distance for row in self.rows if not row.satisfiable})


class EvalReport(BaseModel):
    method: str
    env: str
    seed: int
    episodes: int = 0
    series: List[EvalPoint] = Field(default_factory=list)
    buckets: List[BucketRow] = Field(default_factory=list)
    outcomes: List[TaskOutcome] = Field(default_factory=list)
    bridge_episodes: int = 0
    aborted: bool = False
    diagnostic: Optional[str] = None

    @property
    def final_success_rate(self) -> Optional[float]:
        return self.series[-1].success_rate if self.series else None

    @property
    def bridge_fraction(self) -> float:
        return self.bridge_episodes / self.episodes if self.episodes else 0.0


class GradCheckReport(BaseModel):
    """Worst coordinates found by a central finite-difference check."""
    max_param_error: float
    worst_param: Optional[Tuple[int, int]] = None
    max_input_error: float
    worst_input: Optional[int] = None
    tolerance: float
    passed: bool


class GradientSuiteReport(BaseModel):
    networks: int
    worst_param_error: float
    worst_input_error: float
    worst_composite_error: float
    failures: List[str] = Field(default_factory=list)
    passed: bool


class RunManifest(BaseModel):
    run_name: str
    method: str
    env: str
    seed: int
    preset: Optional[str] = None
    config: dict
    config_hash: str
    version: str
    files: List[str] = Field(default_factory=list)
    aborted: bool = False

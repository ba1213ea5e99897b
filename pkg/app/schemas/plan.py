from enum import Enum
from typing import List

from pydantic import BaseModel, Field


class PlanSource(str, Enum):
    """
    ``none_found``: no search behind the plan (the default, or an empty plan
    read back from text). ``search_exhausted``: candidates drawn, none accepted.
    """
    NONE_FOUND = "none_found"
    FOUND = "found"
    SEARCH_EXHAUSTED = "search_exhausted"


class CandidateMode(str, Enum):
    REPLAY_STATES = "replay_states"
    UNIFORM_FREE_SPACE = "uniform_free_space"
    FIXED_POINTS = "fixed_points"


class BridgeRecord(BaseModel):
    """One accepted bridge with the distances measured when it was accepted."""
    start: List[float]
    bridge: List[float]
    goal: List[float]
    d_start_goal: float
    d_start_bridge: float
    d_bridge_goal: float
    margin: float

    def satisfied(self) -> bool:
        return self.d_start_bridge + self.d_bridge_goal + self.margin < self.d_start_goal


class BridgePlan(BaseModel):
    waypoints: List[List[float]] = Field(default_factory=list)
    source: PlanSource = PlanSource.NONE_FOUND
    accepted: List[BridgeRecord] = Field(default_factory=list)
    candidates_evaluated: int = 0

    @property
    def found(self) -> bool:
        return self.source == PlanSource.FOUND

    def to_text(self) -> str:
        """One waypoint per line, coordinates separated by spaces."""
        return "".join(" ".join(repr(float(v)) for v in point) + "\n" for point in self.waypoints)

    @classmethod
    def from_text(cls, text: str) -> "BridgePlan":
        waypoints = [[float(v) for v in line.split()] for line in text.splitlines() if line.strip()]
        return cls(waypoints=waypoints, source=PlanSource.FOUND if waypoints else PlanSource.NONE_FOUND)

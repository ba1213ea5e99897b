# app/schemas/__init__.py

# Environment contract
from .env import EnvSpec, Wall, MapCalibration

# Run configuration
from .config import Method, EnvName, NetworkConfig, GdgConfig, PlannerConfig, DdpgConfig, RunConfig

# Bridge plans
from .plan import PlanSource, CandidateMode, BridgeRecord, BridgePlan

# Reports
from .report import (
    TaskOutcome, EvalPoint, BucketRow, BucketSummary, BucketTable, EvalReport,
    GradCheckReport, GradientSuiteReport, RunManifest,
)

import logging
from typing import Dict, List

from fastapi import HTTPException

from app.core.exceptions import ConfigurationError, GdgError, PreconditionError
from app.core.presets import PRESETS, preset_config
from app.schemas.config import RunConfig
from app.schemas.report import EvalReport, GradientSuiteReport
from app.services.experiment_service import run_many
from app.services.verification_service import verify_gradients

logger = logging.getLogger(__name__)


def _http_error(exc: GdgError) -> HTTPException:
    status = 400 if isinstance(exc, (ConfigurationError, PreconditionError)) else 500
    return HTTPException(status_code=status, detail=f"{type(exc).__name__}: {exc}")


# 📃 Lista os presets disponíveis com a configuração resolvida
def list_presets() -> Dict[str, RunConfig]:
    return {name: preset_config(name) for name in sorted(PRESETS)}


# 🚀 Treina uma configuração para cada seed pedida
def train(config: RunConfig, seeds: List[int]) -> List[EvalReport]:
    configs = [config.model_copy(update={"seed": seed}) for seed in (seeds or [config.seed])]
    try:
        return run_many(configs)
    except GdgError as exc:
        logger.error(f"❌ Training request failed: {exc}")
        raise _http_error(exc)


# 🔍 Verificação por diferenças finitas
def check_gradients(networks: int, seed: int) -> GradientSuiteReport:
    try:
        return verify_gradients(networks, seed)
    except GdgError as exc:
        raise _http_error(exc)

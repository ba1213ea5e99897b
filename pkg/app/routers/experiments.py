from typing import Dict, List

from fastapi import APIRouter, Body

from app.controllers import experiments as experiment_controller
from app.schemas.config import RunConfig
from app.schemas.report import EvalReport, GradientSuiteReport

router = APIRouter(
    prefix="/experiments",
    tags=["experiments"]
)

# 📃 Rota para listar os presets
@router.get("/presets", response_model=Dict[str, RunConfig])
def list_presets():
    return experiment_controller.list_presets()

# 🚀 Rota para treinar (síncrona; pensada para configurações pequenas)
@router.post("/train", response_model=List[EvalReport])
def train(config: RunConfig, seeds: List[int] = Body(default=[])):
    return experiment_controller.train(config, seeds)

# 🔍 Rota para verificar os gradientes
@router.post("/verify-gradients", response_model=GradientSuiteReport)
def verify_gradients(networks: int = 20, seed: int = 0):
    return experiment_controller.check_gradients(networks, seed)

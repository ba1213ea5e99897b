from typing import List

from fastapi import APIRouter

from app.controllers import maps as map_controller
from app.schemas.env import EnvSpec, MapCalibration

router = APIRouter(
    prefix="/maps",
    tags=["maps"]
)

# 🗺️ Rota para listar os ambientes
@router.get("/", response_model=List[EnvSpec])
def list_envs():
    return map_controller.list_envs()

# 📏 Rota para a calibração de um mapa
@router.get("/{name}/calibration", response_model=MapCalibration)
def get_calibration(name: str):
    return map_controller.get_calibration(name)

from typing import List

from fastapi import HTTPException

from app.core.exceptions import ConfigurationError
from app.envs.maps import ENV_FACTORIES, calibrate, make_env
from app.schemas.env import EnvSpec, MapCalibration


# 🗺️ Lista os ambientes registrados
def list_envs() -> List[EnvSpec]:
    return [make_env(name).spec for name in ENV_FACTORIES]


# 📏 Calibração BFS de um mapa
def get_calibration(name: str) -> MapCalibration:
    try:
        return calibrate(name)
    except ConfigurationError:
        raise HTTPException(status_code=404, detail="Map not found 🚫")

from .base import EnvState, PointEnv, Task
from .grid import OccupancyGrid, UNREACHABLE
from .maps import (
    make_four_rooms, make_city, make_city_desk, make_trap, make_reach3d, make_env, calibrate,
    load_map, parse_map, ENV_FACTORIES,
)

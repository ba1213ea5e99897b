from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.core.config import settings
from app.core.logging_config import configure_logging
from app.routers import experiments, maps


# 🎯 Inicialização: logging e diretório de runs
@asynccontextmanager
async def lifespan(_: FastAPI):
    configure_logging()
    Path(settings.RUNS_DIR).mkdir(parents=True, exist_ok=True)
    yield


# 🎯 Inicializa a API
app = FastAPI(
    title="Goal Distance Gradient",
    description="API para treinar, avaliar e inspecionar agentes goal-conditioned.",
    version=__version__,
    lifespan=lifespan,
)

# 🌍 Configuração do CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=False,  # DEVE ser False quando allow_origins é "*"
    allow_methods=["*"],
    allow_headers=["*"],
)

# 🚀 Incluir as rotas
app.include_router(experiments.router)
app.include_router(maps.router)

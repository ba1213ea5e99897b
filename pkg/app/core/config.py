import os
from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="allow"
    )

    DEBUG: bool = os.getenv("DEBUG", "False").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Output of training runs (one directory per method/env/seed)
    RUNS_DIR: str = os.getenv("RUNS_DIR", "runs")

    # Empty means the maps shipped inside app/envs/maps
    MAPS_DIR: str = os.getenv("MAPS_DIR", "")

    # Parallel (config, seed) runs
    WORKERS: int = int(os.getenv("WORKERS", "1"))
    PROGRESS_BAR: bool = os.getenv("PROGRESS_BAR", "True").lower() == "true"
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "0"))

settings = Settings()

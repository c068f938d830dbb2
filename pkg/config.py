"""
Configuration settings
"""
import logging
from typing import List

from pydantic_settings import BaseSettings
from rich.logging import RichHandler


class Settings(BaseSettings):
    # Artifacts
    OUTPUT_DIR: str = "./runs"
    GLOBAL_SEED: int = 0

    # Logging
    LOG_LEVEL: str = "INFO"

    # Evaluation
    WORKERS: int = 1  # mesh-point evaluation threads
    DENSITY_MAX_RESOLUTION: int = 41
    CKA_PROBE_COUNT: int = 256

    # "desk" runs the full-size recipes, "smoke" shrinks every budget
    RECIPE_SCALE: str = "desk"

    # Artifact API
    HOST: str = "127.0.0.1"
    PORT: int = 8000
    DEBUG: bool = False
    CORS_ORIGINS: List[str] = ["http://localhost:3000", "http://localhost:5173", "http://127.0.0.1:3000", "http://127.0.0.1:5173"]

    class Config:
        env_file = ".env"


settings = Settings()


def configure_logging(level: str = None) -> None:
    """Install a single rich handler on the root logger"""
    root = logging.getLogger()
    root.setLevel((level or settings.LOG_LEVEL).upper())
    if any(isinstance(h, RichHandler) for h in root.handlers):
        return
    handler = RichHandler(show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)

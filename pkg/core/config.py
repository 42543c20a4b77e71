# ==================================================================================
# core/config.py: knotgeo configuration (pydantic-settings + .env)
# ==================================================================================
from pathlib import Path
from typing import Optional
import sys

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict
from loguru import logger


class Settings(BaseSettings):
    # ------------------------
    # REGISTRY CONFIG
    # ------------------------
    REGISTRY: Optional[Path] = None  # KNOTGEO_REGISTRY, merged over the shipped registry

    # ------------------------
    # ENGINE SWITCHES
    # ------------------------
    MIRROR_DELTA: bool = True
    ALLOW_EXTRAPOLATED_UPSILON: bool = False

    # ------------------------
    # ARITHMETIC / OUTPUT LIMITS
    # ------------------------
    MAX_COEFFICIENT: int = 10**6
    MAX_TORUS_INDEX: int = 10**6
    BOX_POINT_LIMIT: int = 10_000_000
    SVG_POINT_LIMIT: int = 10_000
    ASCII_MAX_COLUMNS: int = 200
    ASCII_MAX_ROWS: int = 60
    COMBINATION_COPY_LIMIT: int = 256
    SUMMARY_POINT_LIMIT: int = 20_000

    # ------------------------
    # ENVIRONMENT SETTINGS
    # ------------------------
    LOG_LEVEL: str = "WARNING"
    ENGINE_VERSION: str = "1.0.0"

    @property
    def DEFAULT_REGISTRY_PATH(self) -> Path:
        """Registry shipped next to this module."""
        return Path(__file__).with_name("registry.json")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="KNOTGEO_",
        extra="ignore",
    )


# ------------------------
# Global Settings Loader
# ------------------------
try:
    settings = Settings()
except ValidationError as e:
    logger.error("❌ Environment configuration error: invalid KNOTGEO_* settings!")
    logger.error(str(e))
    sys.exit(1)

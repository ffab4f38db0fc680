from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict  # type: ignore


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix FVELAB_)"""

    # Application
    app_name: str = "FVELab"
    app_version: str = "1.0.0"
    debug: bool = False

    # Server
    host: str = "0.0.0.0"
    port: int = 10000
    reload: bool = False

    # CORS
    cors_origins: list = ["*"]
    cors_credentials: bool = True
    cors_methods: list = ["*"]
    cors_headers: list = ["*"]

    # Logging
    log_level: str = "INFO"
    log_file: str = "logs/fvelab.log"

    # Numerics
    quad_points: Optional[int] = None
    inf_sup_max_dofs: int = 2000
    eoc_floor: float = 5e-12  # relative to max |u|, |u'|

    # Studies
    study_workers: int = 1
    golden_dir: str = ""
    output_dir: str = "results"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="FVELAB_",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()

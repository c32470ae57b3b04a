"""
Ambient settings using Pydantic Settings.
They steer logging and threading only; everything a check depends on lives in the run config.
"""

from functools import lru_cache

from pydantic import ConfigDict, Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Process settings with environment variable support (prefix QISO_)."""

    # Logging
    log_level: str = Field(default="INFO", description="Log level")
    log_format: str = Field(default="console", description="Log format: json or console")
    host: str = Field(default="localhost", description="Host identifier for logs")

    # Threading
    max_workers: int = Field(default=4, ge=1, description="Thread pool size for parallel runs")

    model_config = ConfigDict(
        env_file=[".env.local", ".env"],
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="QISO_",
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings."""
    return Settings()

"""
Runtime configuration. Every value has a default; environment variables with
the INNLOOPS_ prefix override them and command-line flags override both.
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_SEED = 0x1C0FFEE5EED2009


class Settings(BaseSettings):
    """Process-wide settings."""

    model_config = SettingsConfigDict(env_prefix="INNLOOPS_", extra="ignore")

    service_name: str = "innloops"
    environment: str = "development"
    log_level: str = "WARNING"
    log_json: bool = True
    workers: int = Field(default=1, ge=1)
    seed: int = DEFAULT_SEED
    histogram_limit: int = Field(default=2 ** 20, ge=1)
    iso_node_limit: int = Field(default=250_000, ge=1)
    max_order: int = Field(default=512, ge=1)
    cache_dir: Path = Path(".innloops-cache")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        v = v.upper()
        if v not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v!r}")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v


@lru_cache()
def get_settings() -> Settings:
    return Settings()

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class UocoSettings(BaseSettings):
    """Process-wide defaults that can be set using environment variables.

    Reference: https://docs.pydantic.dev/latest/usage/pydantic_settings/
    Every field maps to ``UOCO_<FIELD>`` (e.g. ``UOCO_LOG_LEVEL=DEBUG``).
    """

    log_level: str = "INFO"

    # Iterative projection defaults (halfspace intersections)
    projection_tolerance: float = Field(default=1e-8, ge=0.0)
    max_projection_iterations: int = Field(default=100_000, gt=0)

    # ONS ball projection: exact multiplier root or the fixed spectral rescaling
    ons_projection: Literal["exact", "paper_formula"] = "exact"

    # Harness
    workers: int = Field(default=1, gt=0)
    record_timing: bool = True
    output_dir: str = "runs"

    model_config = SettingsConfigDict(
        env_prefix="UOCO_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


@lru_cache(maxsize=1)
def get_settings() -> UocoSettings:
    """Return the cached settings instance."""
    return UocoSettings()

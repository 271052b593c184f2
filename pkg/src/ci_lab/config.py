"""
Runtime configuration for ci-lab.

Resolution order (later wins):
1. Field defaults below
2. .env file in the working directory (auto-loaded via python-dotenv)
3. Environment variables with the CI_LAB_ prefix (e.g. CI_LAB_MAX_CELLS)
"""

from __future__ import annotations

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Size bounds and logging defaults shared by all modules."""

    model_config = SettingsConfigDict(env_prefix="CI_LAB_", extra="ignore")

    max_cells: int = Field(
        default=4096, ge=1, description="Product-support bound for counterexample search"
    )
    max_partition_support: int = Field(
        default=8, ge=1, description="Effective support bound for coarsening enumeration"
    )
    max_grid_tables: int = Field(
        default=2_000_000, ge=1, description="Bound on the number of exhaustive grid tables"
    )
    log_level: str = Field(default="WARNING", description="CLI logging level")


def get_settings() -> Settings:
    """
    Resolve settings from defaults, .env and environment.

    Not cached: environment overrides take effect on the next call.
    """
    load_dotenv()
    return Settings()

"""Application configuration using Pydantic BaseSettings.

Loads settings from environment variables (or a ``.env`` file) with defaults
sized for desk-scale runs. Every service reads its defaults from here and
accepts explicit overrides as arguments, so tests never need to touch the
environment.
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Order searches
    search_budget: int = Field(
        default=1_000_000,
        gt=0,
        description=(
            "Default number of enumeration steps a point search may walk before "
            "raising BudgetExceededError (override with SEARCH_BUDGET)"
        ),
    )
    enumeration_cache_limit: int = Field(
        default=100_000,
        gt=0,
        description=(
            "Enumerated points memoized per order; longer walks regenerate the tail "
            "instead of keeping it"
        ),
    )
    isolation_probe_budget: int = Field(
        default=10_000,
        gt=0,
        description=(
            "Minimum budget of each emptiness probe made by search_isolated_point; "
            "probes between far-apart heights get more"
        ),
    )
    isolation_probe_depth: int = Field(
        default=32,
        gt=1,
        description="Sample size used to look for isolated points after a negative run completes",
    )

    # 2-adic basis
    q_sequence_cap: int = Field(
        default=100_000,
        gt=0,
        description="Maximum number of h-candidates scanned for a single q-sequence term",
    )

    # Extension search
    node_budget: int = Field(
        default=10_000_000,
        gt=0,
        description="Node budget of the extension-blocking backtracking search",
    )
    progress_interval: int = Field(
        default=100_000,
        gt=0,
        description="Number of search nodes between progress log lines",
    )

    # Construction
    max_depth_nz: int = Field(
        default=14, gt=0, description="Largest construction depth accepted for sources N and Z"
    )
    max_depth_q: int = Field(
        default=12, gt=0, description="Largest construction depth accepted for source Q"
    )

    # Runtime
    log_level: str = Field(default="INFO", description="Python logging level")
    app_version: str = Field(default="1.0.0", description="Application version string")


_settings_instance: Settings | None = None


def get_settings() -> Settings:
    """Return a cached singleton Settings instance.

    Returns:
        The application settings, loaded from environment on first call.
    """
    global _settings_instance
    if _settings_instance is None:
        _settings_instance = Settings()
    return _settings_instance

"""Unit tests for Settings loading (src/config.py)."""

from __future__ import annotations

import pytest
from pydantic import ValidationError

from src.config import Settings, get_settings
from src.services.order_oracle import SearchBudget


def test_defaults(settings_env):
    settings_env.delenv("SEARCH_BUDGET", raising=False)
    settings = Settings(_env_file=None)

    assert settings.search_budget == 1_000_000
    assert settings.isolation_probe_depth == 32
    assert settings.enumeration_cache_limit == 100_000
    assert (settings.max_depth_nz, settings.max_depth_q) == (14, 12)
    assert settings.log_level == "INFO"


def test_environment_overrides(settings_env):
    settings_env.setenv("SEARCH_BUDGET", "500")
    settings_env.setenv("node_budget", "42")

    settings = get_settings()

    assert settings.search_budget == 500
    assert settings.node_budget == 42
    assert SearchBudget.default().max_enumeration_index == 500


def test_get_settings_is_cached(settings_env):
    assert get_settings() is get_settings()


def test_non_positive_budget_is_rejected(settings_env):
    settings_env.setenv("SEARCH_BUDGET", "0")

    with pytest.raises(ValidationError):
        get_settings()

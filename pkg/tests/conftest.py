"""Top-level pytest configuration and shared fixtures for the apforder test suite.

Everything runs in-process with exact rational arithmetic; the only
randomness comes from hypothesis strategies.

Fixture hierarchy
-----------------
q_standard / z_standard / unit_closed / unit_half_open / q_plus_isolated
                 → shared built-in orders (enumeration caches are reused)
small_budget     → SearchBudget small enough for negative runs to fail fast
bit_reversal_map → 8-point binary map 0≺4≺2≺6≺1≺5≺3≺7
chaotic_only_map → 4-point map 2≺3≺0≺1, chaotic but not binary
n_prefix_3       → depth-3 construction from N into q-standard
settings_env     → isolates Settings from the process environment
"""

from __future__ import annotations

from collections.abc import Iterator

import pytest

import src.config as config_module
from src.services.constructor import ConstructionState, construct_prefix
from src.services.order_oracle import (
    BuiltinOrder,
    CountableOrder,
    SearchBudget,
    Source,
    builtin_order,
)
from src.services.verifier import FiniteOrderedMap
from tests.fixtures.known_maps import BIT_REVERSAL_ORDER, CHAOTIC_ONLY_ORDER


# ---------------------------------------------------------------------------
# Orders
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def q_standard() -> CountableOrder:
    return builtin_order(BuiltinOrder.Q_STANDARD)


@pytest.fixture(scope="session")
def z_standard() -> CountableOrder:
    return builtin_order(BuiltinOrder.Z_STANDARD)


@pytest.fixture(scope="session")
def unit_closed() -> CountableOrder:
    return builtin_order(BuiltinOrder.Q_UNIT_CLOSED)


@pytest.fixture(scope="session")
def unit_half_open() -> CountableOrder:
    return builtin_order(BuiltinOrder.Q_UNIT_HALF_OPEN)


@pytest.fixture(scope="session")
def q_plus_isolated() -> CountableOrder:
    return builtin_order(BuiltinOrder.Q_PLUS_ISOLATED)


@pytest.fixture
def small_budget() -> SearchBudget:
    """Budget for runs that are expected to walk it out."""
    return SearchBudget(2_000)


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------


@pytest.fixture
def bit_reversal_map() -> FiniteOrderedMap:
    """Binary map on {0..7} listing the domain by reversed binary digits."""
    return FiniteOrderedMap.from_image_order(BIT_REVERSAL_ORDER)


@pytest.fixture
def chaotic_only_map() -> FiniteOrderedMap:
    """f(2) ≺ f(3) ≺ f(0) ≺ f(1): no monotone 3-AP, but (2, 3, 0) is not binary."""
    return FiniteOrderedMap.from_image_order(CHAOTIC_ONLY_ORDER)


@pytest.fixture(scope="session")
def n_prefix_3(q_standard: CountableOrder) -> ConstructionState:
    return construct_prefix(Source.N, q_standard, 3)


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------


@pytest.fixture
def settings_env(monkeypatch: pytest.MonkeyPatch) -> Iterator[pytest.MonkeyPatch]:
    """Reset the cached Settings before and after the test.

    Tests set environment variables through the yielded ``monkeypatch`` and
    call ``get_settings()`` afterwards.
    """
    monkeypatch.setattr(config_module, "_settings_instance", None)
    yield monkeypatch
    config_module._settings_instance = None

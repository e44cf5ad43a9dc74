"""Unit tests for description-file loading (src/services/order_loader.py).

Each test writes its own description files under ``tmp_path``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from src.exceptions import OrderDescriptionError, UnknownOrderError
from src.services.order_loader import OrderLoader, load_order_description, resolve_order
from src.services.order_oracle import Source, admissible_sources

UNIT_PLUS_TWO = {
    "name": "unit-plus-two",
    "description": "[0, 1] together with the point 2",
    "comparator": {
        "kind": "union",
        "of": [
            {"kind": "interval", "of": {"kind": "standard"}, "lower": "0", "upper": "1"},
            {"kind": "interval", "of": {"kind": "standard"}, "lower": "2", "upper": "2"},
        ],
    },
    "declared": {"has_isolated_points": True, "has_maximum": True, "has_minimum": True},
}

INTEGERS_DECLARED_DENSE = {
    "name": "integers-mislabelled",
    "comparator": {"kind": "standard", "carrier": "integers"},
    "declared": {"has_isolated_points": False, "has_maximum": False, "has_minimum": False},
}

ORDERS_DIR = Path(__file__).resolve().parents[2] / "orders"


def _write(directory: Path, name: str, payload: object) -> Path:
    path = directory / name
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def loader() -> OrderLoader:
    return OrderLoader()


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def test_load_valid_description(loader, tmp_path):
    path = _write(tmp_path, "unit_plus_two.json", UNIT_PLUS_TWO)

    loaded = loader.load(path)

    assert loaded.order.name == "unit-plus-two"
    assert loaded.order.contains(Fraction(2)) and not loaded.order.contains(Fraction(3, 2))
    assert loaded.order.properties.has_isolated_points
    assert len(loaded.checksum) == 64
    assert loaded.warnings == ()
    assert loaded.path == path.resolve()


def test_load_is_cached_by_path(loader, tmp_path):
    path = _write(tmp_path, "unit_plus_two.json", UNIT_PLUS_TWO)

    first = loader.load(path)
    assert loader.is_loaded(path)
    assert loader.load(str(path)) is first

    loader.clear()
    assert not loader.is_loaded(path)


def test_undeclared_isolated_point_is_a_warning(loader, tmp_path, caplog):
    path = _write(tmp_path, "integers.json", INTEGERS_DECLARED_DENSE)

    with caplog.at_level("WARNING", logger="src.services.order_loader"):
        loaded = loader.load(path)

    assert len(loaded.warnings) == 1
    assert "looks isolated" in loaded.warnings[0]
    assert "looks isolated" in caplog.text


# ---------------------------------------------------------------------------
# Failures
# ---------------------------------------------------------------------------


def test_missing_file(loader, tmp_path):
    with pytest.raises(OrderDescriptionError) as exc_info:
        loader.load(tmp_path / "missing.json")
    assert exc_info.value.path.endswith("missing.json")


def test_invalid_json(loader, tmp_path):
    path = _write(tmp_path, "broken.json", '{"name": "broken",')

    with pytest.raises(OrderDescriptionError) as exc_info:
        loader.load(path)
    assert "invalid JSON" in str(exc_info.value)


def test_schema_violation_names_the_field(loader, tmp_path):
    payload = {key: value for key, value in UNIT_PLUS_TWO.items() if key != "declared"}
    path = _write(tmp_path, "no_declared.json", payload)

    with pytest.raises(OrderDescriptionError) as exc_info:
        loader.load(path)
    assert "declared" in str(exc_info.value)


def test_bad_rational_bound(loader, tmp_path):
    payload = dict(UNIT_PLUS_TWO)
    payload["comparator"] = {"kind": "interval", "of": {"kind": "standard"}, "lower": "zero"}
    path = _write(tmp_path, "bad_bound.json", payload)

    with pytest.raises(OrderDescriptionError):
        loader.load(path)


def test_finite_order_does_not_compile(loader, tmp_path):
    payload = dict(UNIT_PLUS_TWO)
    payload["comparator"] = {
        "kind": "interval", "of": {"kind": "standard", "carrier": "integers"},
        "lower": "0", "upper": "3",
    }
    path = _write(tmp_path, "finite.json", payload)

    with pytest.raises(OrderDescriptionError):
        loader.load(path)


# ---------------------------------------------------------------------------
# Resolving names
# ---------------------------------------------------------------------------


def test_resolve_prefers_builtin_names(loader):
    assert loader.resolve("q-unit-closed").name == "q-unit-closed"


def test_resolve_falls_back_to_files(loader, tmp_path):
    path = _write(tmp_path, "unit_plus_two.json", UNIT_PLUS_TWO)

    assert loader.resolve(str(path)).name == "unit-plus-two"


def test_resolve_unknown_name(loader):
    with pytest.raises(UnknownOrderError) as exc_info:
        loader.resolve("no-such-order")
    assert exc_info.value.name == "no-such-order"


def test_shared_loader_resolves_builtins():
    assert resolve_order("z-standard").name == "z-standard"


@pytest.mark.parametrize(
    "filename, name, admissible",
    [
        ("unit_plus_two.json", "unit-plus-two", set()),
        ("unit_left_open.json", "unit-left-open", {Source.N, Source.Z, Source.Q}),
    ],
)
def test_shipped_descriptions_load(filename, name, admissible):
    order = load_order_description(ORDERS_DIR / filename)

    assert order.name == name
    assert admissible_sources(order) == admissible

"""Loader for order description files.

An order is named on the command line either by a built-in name
(``q-standard``, ``z-standard``, ...) or by the path of a JSON description
file (see :mod:`src.schemas.order`). Loaded files are validated, compiled,
sanity-checked on a small sample and cached by resolved path.

Usage::

    from src.services.order_loader import OrderLoader

    loader = OrderLoader()
    order = loader.resolve("q-unit-closed")
    custom = loader.resolve("orders/unit_plus_two.json")
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from pydantic import ValidationError

from src.exceptions import OrderDescriptionError, PreconditionError, UnknownOrderError
from src.schemas.order import OrderDescription
from src.services.order_oracle import (
    CountableOrder,
    SearchBudget,
    builtin_order,
    compile_description,
    order_axiom_problems,
    search_isolated_point,
)

logger = logging.getLogger(__name__)

# Sample sizes of the load-time sanity checks.
AXIOM_SAMPLE = 24
ISOLATION_SAMPLE = 8
ISOLATION_PROBE_BUDGET = 2_000


@dataclass(frozen=True)
class LoadedOrder:
    """A compiled description together with where it came from.

    Attributes:
        order: The compiled order.
        path: Resolved file path.
        checksum: SHA-256 hex digest of the file contents.
        warnings: Load-time findings that did not stop the load.
    """

    order: CountableOrder
    path: Path
    checksum: str
    warnings: tuple[str, ...] = ()


class OrderLoader:
    """Resolve order names and load description files, caching by path."""

    def __init__(self) -> None:
        self._cache: dict[Path, LoadedOrder] = {}

    def load(self, path: Path | str) -> LoadedOrder:
        """Read, validate and compile a description file.

        Raises:
            OrderDescriptionError: If the file is unreadable, not valid JSON,
                fails schema validation, does not compile, or its comparator
                disagrees with its own enumeration.
        """
        resolved = Path(path).resolve()
        if resolved in self._cache:
            return self._cache[resolved]

        try:
            text = resolved.read_text(encoding="utf-8")
        except OSError as exc:
            raise OrderDescriptionError(f"cannot read {path}: {exc}", path=str(path)) from exc
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise OrderDescriptionError(
                f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}", path=str(path)
            ) from exc
        try:
            description = OrderDescription.model_validate(payload)
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise OrderDescriptionError(
                f"{path}: {location}: {first['msg']}", path=str(path)
            ) from exc
        try:
            order = compile_description(description)
        except PreconditionError as exc:
            raise OrderDescriptionError(f"{path}: {exc}", path=str(path)) from exc

        problems = order_axiom_problems(order, AXIOM_SAMPLE)
        if problems:
            raise OrderDescriptionError(f"{path}: {problems[0]}", path=str(path))

        warnings = self._undeclared_isolation(order)
        for warning in warnings:
            logger.warning("%s: %s", path, warning)

        loaded = LoadedOrder(
            order=order,
            path=resolved,
            checksum=hashlib.sha256(text.encode("utf-8")).hexdigest(),
            warnings=tuple(warnings),
        )
        self._cache[resolved] = loaded
        logger.info("Order %r loaded from %s, checksum=%s", order.name, path, loaded.checksum[:16])
        return loaded

    def resolve(self, name_or_path: str) -> CountableOrder:
        """Return the built-in order of that name, else the order described in that file.

        Raises:
            UnknownOrderError: If ``name_or_path`` is neither.
            OrderDescriptionError: If the file exists but does not load.
        """
        try:
            return builtin_order(name_or_path)
        except UnknownOrderError:
            pass
        if not Path(name_or_path).is_file():
            raise UnknownOrderError(name_or_path)
        return self.load(name_or_path).order

    def is_loaded(self, path: Path | str) -> bool:
        return Path(path).resolve() in self._cache

    def clear(self) -> None:
        self._cache.clear()

    @staticmethod
    def _undeclared_isolation(order: CountableOrder) -> list[str]:
        """Declared properties cannot be decided; flag an obvious contradiction."""
        if order.properties.has_isolated_points:
            return []
        witness = search_isolated_point(
            order, ISOLATION_SAMPLE, SearchBudget(ISOLATION_PROBE_BUDGET)
        )
        if witness is None:
            return []
        return [
            f"declared without isolated points, but {witness.point} looks isolated "
            f"(case {witness.case.value})"
        ]


_default_loader = OrderLoader()


def load_order_description(path: Path | str) -> CountableOrder:
    """Load a description file with the shared loader."""
    return _default_loader.load(path).order


def resolve_order(name_or_path: str) -> CountableOrder:
    """Resolve a built-in name or a description file with the shared loader."""
    return _default_loader.resolve(name_or_path)

"""Serialisation of construction prefixes, audits and finite maps.

Two formats are written:

* ``tsv`` (default): ``#``-prefixed metadata lines, then one entry per line::

      # source=N order=q-standard depth=3
      # points=8 coverage_cursor=8 reversed_run=false
      # enumeration_indices=7,3,1,4,0,5,2,6
      7	0	-3
      3	1	-2
      ...

  Columns are domain element, image rank and image value, ascending by image.
* ``json-lines``: a :class:`PrefixHeaderRecord` followed by one
  :class:`MapEntryRecord` per entry.

:func:`parse_map` reads either form back (and the plain two-column form).
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ValidationError

from src.exceptions import InjectivityError, MapFormatError
from src.schemas.records import MapEntryRecord, PrefixHeaderRecord, StepAuditRecord
from src.services.constructor import ConstructionState
from src.services.order_oracle import CountableOrder
from src.services.rational_core import format_rational, parse_rational
from src.services.verifier import FiniteOrderedMap

logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    TSV = "tsv"
    JSON_LINES = "json-lines"


def dump_records(records: Iterable[BaseModel]) -> str:
    """One compact JSON object per line, keys in declaration order."""
    return "".join(record.model_dump_json() + "\n" for record in records)


def _header(state: ConstructionState) -> PrefixHeaderRecord:
    return PrefixHeaderRecord(
        source=state.source.value,
        order=state.order.name,
        depth=state.depth,
        points=len(state.final_map),
        coverage_cursor=state.coverage_cursor,
        reversed_run=state.reversed_run,
    )


def _entries(state: ConstructionState) -> list[MapEntryRecord]:
    order = state.order
    limit = state.budget.max_enumeration_index
    return [
        MapEntryRecord(
            domain=format_rational(a),
            rank=rank,
            image=format_rational(x),
            enumeration_index=order.index_of(x, limit),
        )
        for rank, (a, x) in enumerate(state.final_map.entries)
    ]


def emit_prefix(state: ConstructionState, fmt: OutputFormat | str = OutputFormat.TSV) -> str:
    """Serialise the final map of ``state`` sorted by image position."""
    fmt = OutputFormat(fmt)
    header = _header(state)
    entries = _entries(state)
    if fmt is OutputFormat.JSON_LINES:
        return dump_records([header, *entries])
    indices = ",".join(
        "-" if e.enumeration_index is None else str(e.enumeration_index) for e in entries
    )
    lines = [
        f"# source={header.source} order={header.order} depth={header.depth}",
        f"# points={header.points} coverage_cursor={header.coverage_cursor} "
        f"reversed_run={str(header.reversed_run).lower()}",
        f"# enumeration_indices={indices}",
    ]
    lines.extend(f"{e.domain}\t{e.rank}\t{e.image}" for e in entries)
    return "\n".join(lines) + "\n"


def emit_audit(state: ConstructionState) -> str:
    """JSON lines, one :class:`StepAuditRecord` per construction step."""
    return dump_records(StepAuditRecord(**step.to_dict()) for step in state.steps)


def write_text(path: Path | str, text: str) -> Path:
    """Write ``text`` to ``path`` (UTF-8), creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    logger.info("Wrote %d bytes to %s", len(text.encode("utf-8")), target)
    return target


# ---------------------------------------------------------------------------
# Reading maps
# ---------------------------------------------------------------------------


def _parse_json_line(line: str, line_number: int) -> Optional[MapEntryRecord]:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"invalid JSON: {exc.msg}", line_number) from exc
    if not isinstance(payload, dict):
        raise MapFormatError("JSON line is not an object", line_number)
    if payload.get("kind", "entry") != "entry":
        return None
    try:
        return MapEntryRecord.model_validate(payload)
    except ValidationError as exc:
        message = exc.errors()[0]["msg"]
        raise MapFormatError(f"invalid entry record: {message}", line_number) from exc


def parse_map(text: str, order: CountableOrder | None = None) -> FiniteOrderedMap:
    """Parse a map file.

    Without ``order`` the rank column is used (images become ranks under the
    standard order of ℚ); with ``order`` the image column is read and must
    hold points of that order. Blank lines and ``#`` lines are skipped.

    Raises:
        MapFormatError: On a malformed line, a missing column or a repeated value.
    """
    pairs: list[tuple[Fraction, Fraction]] = []
    ranks: list[tuple[Fraction, int]] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("{"):
            record = _parse_json_line(line, line_number)
            if record is None:
                continue
            domain_text, rank_text, image_text = record.domain, str(record.rank), record.image
        else:
            columns = line.split("\t") if "\t" in line else line.split()
            if len(columns) not in (2, 3):
                raise MapFormatError(
                    f"expected 2 or 3 columns, got {len(columns)}", line_number
                )
            domain_text, rank_text = columns[0], columns[1]
            image_text = columns[2] if len(columns) == 3 else columns[1]
        try:
            a = parse_rational(domain_text)
        except ValueError as exc:
            raise MapFormatError(str(exc), line_number) from exc
        if order is None:
            try:
                rank = int(rank_text)
            except ValueError as exc:
                raise MapFormatError(f"invalid rank {rank_text!r}", line_number) from exc
            ranks.append((a, rank))
            continue
        if image_text is None:
            raise MapFormatError("entry has no image value", line_number)
        try:
            x = parse_rational(image_text)
        except ValueError as exc:
            raise MapFormatError(str(exc), line_number) from exc
        if not order.contains(x):
            raise MapFormatError(
                f"image {format_rational(x)} is not a point of {order.name}", line_number
            )
        pairs.append((a, x))
    try:
        if order is None:
            return FiniteOrderedMap.from_ranks(ranks)
        return FiniteOrderedMap(pairs, order)
    except InjectivityError as exc:
        raise MapFormatError(str(exc)) from exc


def read_map(path: Path | str, order: CountableOrder | None = None) -> FiniteOrderedMap:
    return parse_map(Path(path).read_text(encoding="utf-8"), order)

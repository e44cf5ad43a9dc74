"""Pydantic v2 schema validating a parsed command line."""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.services.rational_core import parse_rational


class Command(str, Enum):
    CONSTRUCT = "construct"
    VERIFY = "verify"
    QSEQ = "qseq"
    RSEQ = "rseq"
    DECOMPOSE = "decompose"
    BLOCK_SEARCH = "block-search"
    NEGATIVE_RUN = "negative-run"
    SEARCH_ISOLATED = "search-isolated"
    SHIFT_LEMMA = "shift-lemma"


_REQUIRED: dict[Command, tuple[str, ...]] = {
    Command.CONSTRUCT: ("source", "order", "depth"),
    Command.VERIFY: ("input",),
    Command.QSEQ: ("count",),
    Command.RSEQ: ("count",),
    Command.DECOMPOSE: ("r", "depth"),
    Command.BLOCK_SEARCH: ("pattern", "max_depth"),
    Command.NEGATIVE_RUN: ("source", "order", "depth"),
    Command.SEARCH_ISOLATED: ("order",),
    Command.SHIFT_LEMMA: ("points", "r"),
}

_FLAGS: dict[str, str] = {"points": "--set", "input": "FILE"}


class RunConfig(BaseModel):
    """One CLI invocation after argparse.

    Attributes:
        command: The subcommand.
        order: Built-in order name or path of a description file.
        source: Source domain ``N``, ``Z`` or ``Q``.
        depth: Construction depth, r-sequence length or isolation sample size.
        budget: Enumeration steps per point search.
        count: Number of sequence terms.
        nodes: Node budget of the extension search.
        max_depth: Arrangement size ``M`` of the extension search.
        input: Map file to verify, ``-`` for stdin.
        pattern: Domain listed in ascending image order, comma separated.
        r: A rational in ``p/q`` form.
        points: Comma-separated rationals (shift-lemma set).
        emit: Output path for the constructed prefix.
        audit: Output path for the construction audit.
        output_format: ``tsv`` or ``json-lines``.
        extend: Grow the r-sequence until decomposition succeeds.
        log_level: Overrides ``Settings.log_level``.
    """

    model_config = ConfigDict(strict=False, populate_by_name=True, extra="forbid")

    command: Command
    order: str | None = None
    source: Literal["N", "Z", "Q"] | None = None
    depth: int | None = Field(default=None, ge=0)
    budget: int | None = Field(default=None, gt=0)
    count: int | None = Field(default=None, gt=0)
    nodes: int | None = Field(default=None, gt=0)
    max_depth: int | None = Field(default=None, gt=0)
    input: str | None = None
    pattern: str | None = None
    r: str | None = None
    points: str | None = None
    emit: Path | None = None
    audit: Path | None = None
    output_format: Literal["tsv", "json-lines"] = Field(default="tsv", alias="format")
    extend: bool = False
    log_level: str | None = Field(
        default=None, pattern=r"^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$"
    )

    @field_validator("source", mode="before")
    @classmethod
    def normalise_source(cls, value: str | None) -> str | None:
        return value.upper() if isinstance(value, str) else value

    @field_validator("log_level", mode="before")
    @classmethod
    def normalise_log_level(cls, value: str | None) -> str | None:
        return value.upper() if isinstance(value, str) else value

    @field_validator("r")
    @classmethod
    def check_r(cls, value: str | None) -> str | None:
        if value is not None:
            parse_rational(value)
        return value

    @field_validator("points")
    @classmethod
    def check_points(cls, value: str | None) -> str | None:
        if value is not None:
            for item in value.split(","):
                parse_rational(item)
        return value

    @field_validator("pattern")
    @classmethod
    def check_pattern(cls, value: str | None) -> str | None:
        if value is not None and value.strip():
            for item in value.split(","):
                int(item.strip())
        return value

    @model_validator(mode="after")
    def check_required(self) -> RunConfig:
        missing = [name for name in _REQUIRED[self.command] if getattr(self, name) is None]
        if missing:
            flags = ", ".join(_FLAGS.get(name, "--" + name.replace("_", "-")) for name in missing)
            raise ValueError(f"{self.command.value} requires {flags}")
        return self

    def pattern_values(self) -> list[int]:
        if self.pattern is None or not self.pattern.strip():
            return []
        return [int(item.strip()) for item in self.pattern.split(",")]

    def point_values(self) -> list[Fraction]:
        return [] if self.points is None else [parse_rational(p) for p in self.points.split(",")]

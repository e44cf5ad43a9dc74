"""Pydantic v2 schemas for the JSON-lines records written by the CLI.

Every record carries a ``kind`` discriminator so a consumer can read mixed
streams (a prefix header followed by its entries, an audit trail, ...).
Rationals travel in their ``p/q`` text form.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.services.rational_core import parse_rational


def _check_rational(value: str | None) -> str | None:
    if value is not None:
        parse_rational(value)
    return value


class PrefixHeaderRecord(BaseModel):
    """Metadata line of an emitted construction prefix."""

    model_config = ConfigDict(strict=False, populate_by_name=True)

    kind: Literal["header"] = "header"
    source: str = Field(..., pattern=r"^(N|Z|Q)$")
    order: str
    depth: int = Field(..., ge=0)
    points: int = Field(..., gt=0)
    coverage_cursor: int = Field(..., ge=0)
    reversed_run: bool = False


class MapEntryRecord(BaseModel):
    """One ``(domain, image)`` pair of a finite map.

    Attributes:
        domain: Domain element.
        rank: Position of the image among all listed images, 0 for the least.
        image: The image point.
        enumeration_index: ``k`` with ``g(k) = image`` when known.
    """

    model_config = ConfigDict(strict=False, populate_by_name=True)

    kind: Literal["entry"] = "entry"
    domain: str
    rank: int = Field(..., ge=0)
    image: str | None = None
    enumeration_index: int | None = Field(default=None, ge=0)

    @field_validator("domain", "image")
    @classmethod
    def check_rational_fields(cls, value: str | None) -> str | None:
        return _check_rational(value)


class StepAuditRecord(BaseModel):
    """One construction step of an audit trail."""

    model_config = ConfigDict(strict=False, populate_by_name=True)

    kind: Literal["step"] = "step"
    step: int = Field(..., ge=0)
    lemma: str = Field(..., pattern=r"^(add_odd|add_outside)$")
    r: str
    target: str | None = None
    target_index: int | None = None
    target_preimage: str | None = None
    new_entries: list[list[str]] = Field(default_factory=list)
    enumeration_indices: list[int | None] = Field(default_factory=list)
    coverage_cursor: int = Field(..., ge=0)


class SequenceTermRecord(BaseModel):
    """A term of a q- or r-sequence."""

    model_config = ConfigDict(strict=False, populate_by_name=True)

    kind: Literal["term"] = "term"
    sequence: str = Field(..., pattern=r"^(q|r)$")
    index: int = Field(..., ge=0)
    value: str
    ord2: int
    source_index: int | None = None
    subset: list[int] = Field(default_factory=list)

    @field_validator("value")
    @classmethod
    def check_rational_value(cls, value: str) -> str:
        parse_rational(value)
        return value


class CheckRecord(BaseModel):
    """One named check inside a verification record."""

    model_config = ConfigDict(strict=False, populate_by_name=True)

    name: str
    status: str = Field(..., pattern=r"^(passed|failed|error)$")
    message: str = ""
    details: dict[str, Any] = Field(default_factory=dict)


class VerificationRecord(BaseModel):
    """Result of verifying a finite map."""

    model_config = ConfigDict(strict=False, populate_by_name=True)

    kind: Literal["verification"] = "verification"
    size: int = Field(..., ge=0)
    classification: str = Field(..., pattern=r"^(binary|chaotic-only|not-chaotic)$")
    three_ap: list[str] | None = None
    binary_violation: list[str] | None = None
    maxmin_witness: list[str] | None = None
    checks: list[CheckRecord] = Field(default_factory=list)


class OutcomeRecord(BaseModel):
    """Outcome of a search or check subcommand."""

    model_config = ConfigDict(strict=False, populate_by_name=True)

    kind: Literal["outcome"] = "outcome"
    command: str
    outcome: str
    details: dict[str, Any] = Field(default_factory=dict)

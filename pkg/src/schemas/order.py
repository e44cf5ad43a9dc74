"""Pydantic v2 schemas for order description files.

An order description names a comparator over rationals built from a fixed
catalog of combinators and self-declares the properties that cannot be
decided from finite data::

    {
      "name": "unit-plus-two",
      "comparator": {
        "kind": "union",
        "of": [
          {"kind": "interval", "of": {"kind": "standard"}, "lower": "0", "upper": "1"},
          {"kind": "interval", "of": {"kind": "standard"}, "lower": "2", "upper": "2"}
        ]
      },
      "declared": {"has_isolated_points": true, "has_maximum": true, "has_minimum": true}
    }
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.services.rational_core import parse_rational


class StandardComparator(BaseModel):
    """The standard order of the rationals (or of the integers)."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["standard"]
    carrier: Literal["rationals", "integers"] = "rationals"


class ReversedComparator(BaseModel):
    """The inner comparator with its direction flipped."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["reversed"]
    of: ComparatorSpec


class IntervalComparator(BaseModel):
    """The inner comparator restricted to an interval of values.

    Attributes:
        lower: Lower end in ``p/q`` form, ``None`` for unbounded.
        upper: Upper end in ``p/q`` form, ``None`` for unbounded.
        lower_closed: Whether ``lower`` itself belongs to the interval.
        upper_closed: Whether ``upper`` itself belongs to the interval.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["interval"]
    of: ComparatorSpec
    lower: str | None = None
    upper: str | None = None
    lower_closed: bool = True
    upper_closed: bool = True

    @field_validator("lower", "upper")
    @classmethod
    def check_rational_text(cls, value: str | None) -> str | None:
        if value is not None:
            parse_rational(value)
        return value


class UnionComparator(BaseModel):
    """Finite union of restrictions sharing one direction."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["union"]
    of: list[ComparatorSpec] = Field(..., min_length=1)


ComparatorSpec = Annotated[
    Union[StandardComparator, ReversedComparator, IntervalComparator, UnionComparator],
    Field(discriminator="kind"),
]


class DeclaredProperties(BaseModel):
    """Properties an order self-declares; they are documented, not decided."""

    model_config = ConfigDict(extra="forbid")

    has_isolated_points: bool
    has_maximum: bool
    has_minimum: bool


class OrderDescription(BaseModel):
    """Complete order description file.

    Attributes:
        name: Name used in CLI output and emitted headers.
        description: Free-text description.
        comparator: The combinator tree.
        declared: Self-declared properties.
    """

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, pattern=r"^[A-Za-z0-9_.+-]+$")
    description: str = ""
    comparator: ComparatorSpec
    declared: DeclaredProperties


ReversedComparator.model_rebuild()
IntervalComparator.model_rebuild()
UnionComparator.model_rebuild()
OrderDescription.model_rebuild()

"""Pydantic v2 schemas for order descriptions, CLI configuration and output records."""

from src.schemas.order import (
    ComparatorSpec,
    DeclaredProperties,
    IntervalComparator,
    OrderDescription,
    ReversedComparator,
    StandardComparator,
    UnionComparator,
)
from src.schemas.records import (
    CheckRecord,
    MapEntryRecord,
    OutcomeRecord,
    PrefixHeaderRecord,
    SequenceTermRecord,
    StepAuditRecord,
    VerificationRecord,
)
from src.schemas.run_config import Command, RunConfig

__all__ = [
    "ComparatorSpec",
    "DeclaredProperties",
    "IntervalComparator",
    "OrderDescription",
    "ReversedComparator",
    "StandardComparator",
    "UnionComparator",
    "CheckRecord",
    "MapEntryRecord",
    "OutcomeRecord",
    "PrefixHeaderRecord",
    "SequenceTermRecord",
    "StepAuditRecord",
    "VerificationRecord",
    "Command",
    "RunConfig",
]

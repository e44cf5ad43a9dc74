"""Unit tests for the Pydantic schemas (src/schemas/)."""

from __future__ import annotations

from fractions import Fraction

import pytest
from pydantic import ValidationError

from src.schemas.order import OrderDescription
from src.schemas.records import (
    MapEntryRecord,
    OutcomeRecord,
    SequenceTermRecord,
    StepAuditRecord,
    VerificationRecord,
)
from src.schemas.run_config import Command, RunConfig

# ---------------------------------------------------------------------------
# RunConfig
# ---------------------------------------------------------------------------


def test_construct_config_normalises_source_and_format():
    config = RunConfig.model_validate(
        {"command": "construct", "source": "q", "order": "q-standard", "depth": 4,
         "format": "json-lines"}
    )

    assert config.command is Command.CONSTRUCT
    assert config.source == "Q"
    assert config.output_format == "json-lines"
    assert config.budget is None and config.emit is None


@pytest.mark.parametrize(
    "payload, flag",
    [
        ({"command": "construct", "source": "N", "order": "q-standard"}, "--depth"),
        ({"command": "block-search", "pattern": "2,3,0,1"}, "--max-depth"),
        ({"command": "shift-lemma", "r": "1"}, "--set"),
        ({"command": "verify"}, "FILE"),
    ],
)
def test_missing_required_flag_is_named(payload, flag):
    with pytest.raises(ValidationError) as exc_info:
        RunConfig.model_validate(payload)
    assert flag in str(exc_info.value)


@pytest.mark.parametrize(
    "payload",
    [
        {"command": "construct", "source": "R", "order": "q-standard", "depth": 2},
        {"command": "construct", "source": "N", "order": "q-standard", "depth": -1},
        {"command": "negative-run", "source": "N", "order": "z-standard", "depth": 2,
         "budget": 0},
        {"command": "decompose", "r": "7/0", "depth": 9},
        {"command": "shift-lemma", "points": "0,1/2,x", "r": "1"},
        {"command": "block-search", "pattern": "2,three", "max_depth": 6},
        {"command": "qseq", "count": 3, "log_level": "LOUD"},
        {"command": "qseq", "count": 3, "threads": 4},
    ],
)
def test_invalid_values_are_rejected(payload):
    with pytest.raises(ValidationError):
        RunConfig.model_validate(payload)


def test_pattern_and_point_values():
    config = RunConfig.model_validate(
        {"command": "shift-lemma", "points": "0, 1/2,-3", "r": "1/4"}
    )
    assert config.point_values() == [0, Fraction(1, 2), -3]

    spaced = RunConfig.model_validate(
        {"command": "block-search", "pattern": " 2, 3,0,1 ", "max_depth": 6}
    )
    assert spaced.pattern_values() == [2, 3, 0, 1]

    empty = RunConfig.model_validate({"command": "block-search", "pattern": "", "max_depth": 3})
    assert empty.pattern_values() == []


def test_log_level_is_upper_cased():
    config = RunConfig.model_validate({"command": "qseq", "count": 2, "log_level": "debug"})

    assert config.log_level == "DEBUG"


# ---------------------------------------------------------------------------
# Order descriptions
# ---------------------------------------------------------------------------


def test_nested_description_validates():
    description = OrderDescription.model_validate(
        {
            "name": "reversed-unit",
            "comparator": {
                "kind": "reversed",
                "of": {"kind": "interval", "of": {"kind": "standard"}, "lower": "0"},
            },
            "declared": {"has_isolated_points": False, "has_maximum": True, "has_minimum": False},
        }
    )

    assert description.comparator.kind == "reversed"
    assert description.description == ""


@pytest.mark.parametrize(
    "name, comparator",
    [
        ("has space", {"kind": "standard"}),
        ("ok", {"kind": "shuffled"}),
        ("ok", {"kind": "union", "of": []}),
        ("ok", {"kind": "standard", "carrier": "reals"}),
    ],
)
def test_invalid_descriptions(name, comparator):
    with pytest.raises(ValidationError):
        OrderDescription.model_validate(
            {
                "name": name,
                "comparator": comparator,
                "declared": {
                    "has_isolated_points": False, "has_maximum": False, "has_minimum": False,
                },
            }
        )


# ---------------------------------------------------------------------------
# Output records
# ---------------------------------------------------------------------------


def test_entry_record_checks_rationals():
    assert MapEntryRecord(domain="-1/2", rank=0, image="3").kind == "entry"
    with pytest.raises(ValidationError):
        MapEntryRecord(domain="half", rank=0)


def test_step_record_rejects_unknown_lemma():
    with pytest.raises(ValidationError):
        StepAuditRecord(step=0, lemma="add_even", r="1", coverage_cursor=1)


def test_sequence_term_record():
    record = SequenceTermRecord(sequence="q", index=3, value="8/3", ord2=3, source_index=6)

    assert record.model_dump()["kind"] == "term"
    with pytest.raises(ValidationError):
        SequenceTermRecord(sequence="p", index=0, value="1", ord2=0)


def test_verification_record_classification_values():
    VerificationRecord(size=4, classification="chaotic-only")
    with pytest.raises(ValidationError):
        VerificationRecord(size=4, classification="mostly-binary")


def test_outcome_record_json_shape():
    record = OutcomeRecord(command="qseq", outcome="ok", details={"count": 3})

    assert record.model_dump_json() == (
        '{"kind":"outcome","command":"qseq","outcome":"ok","details":{"count":3}}'
    )

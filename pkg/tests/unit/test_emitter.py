"""Unit tests for prefix/audit serialisation and map parsing (src/services/emitter.py)."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from src.exceptions import MapFormatError
from src.services.emitter import (
    OutputFormat,
    emit_audit,
    emit_prefix,
    parse_map,
    read_map,
    write_text,
)
from src.services.verifier import MapClass, MapVerifier
from tests.fixtures.known_maps import (
    BIT_REVERSAL_ORDER,
    BIT_REVERSAL_TSV,
    N_DEPTH3_DOMAIN_IN_IMAGE_ORDER,
    N_DEPTH3_ENUMERATION_INDICES,
    N_DEPTH3_IMAGES,
)

# ---------------------------------------------------------------------------
# Emitting
# ---------------------------------------------------------------------------


def test_tsv_prefix_header_and_rows(n_prefix_3):
    lines = emit_prefix(n_prefix_3).splitlines()

    assert lines[0] == "# source=N order=q-standard depth=3"
    assert lines[1] == "# points=8 coverage_cursor=8 reversed_run=false"
    assert lines[2] == "# enumeration_indices=" + ",".join(
        str(k) for k in N_DEPTH3_ENUMERATION_INDICES
    )
    rows = [line.split("\t") for line in lines[3:]]
    assert [int(r[0]) for r in rows] == list(N_DEPTH3_DOMAIN_IN_IMAGE_ORDER)
    assert [int(r[1]) for r in rows] == list(range(8))
    assert tuple(r[2] for r in rows) == N_DEPTH3_IMAGES


def test_json_lines_prefix(n_prefix_3):
    records = [json.loads(line) for line in emit_prefix(n_prefix_3, "json-lines").splitlines()]

    assert records[0]["kind"] == "header"
    assert records[0]["points"] == 8 and records[0]["reversed_run"] is False
    assert [r["kind"] for r in records[1:]] == ["entry"] * 8
    assert records[4] == {
        "kind": "entry", "domain": "5", "rank": 3, "image": "-1/2", "enumeration_index": 4
    }


def test_audit_has_one_record_per_step(n_prefix_3):
    records = [json.loads(line) for line in emit_audit(n_prefix_3).splitlines()]

    assert [r["step"] for r in records] == [0, 1, 2]
    assert all(r["kind"] == "step" and r["lemma"] == "add_odd" for r in records)
    assert records[2]["target"] == "-1/2"


@pytest.mark.parametrize("fmt", list(OutputFormat))
def test_emitted_prefix_reads_back(n_prefix_3, q_standard, fmt):
    """Emitted output parses back to the same map, with or without the order."""
    text = emit_prefix(n_prefix_3, fmt)

    assert parse_map(text, q_standard).as_dict() == n_prefix_3.final_map.as_dict()
    by_rank = parse_map(text)
    assert by_rank.domain_in_image_order == n_prefix_3.final_map.domain_in_image_order
    assert MapVerifier().verify(by_rank).classification is MapClass.BINARY


def test_write_text_creates_parent_directories(tmp_path):
    target = write_text(tmp_path / "out" / "prefix.tsv", "x\n")

    assert target.read_text(encoding="utf-8") == "x\n"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def test_two_column_map_uses_ranks():
    m = parse_map(BIT_REVERSAL_TSV)

    assert m.domain_in_image_order == list(BIT_REVERSAL_ORDER)


def test_comments_blank_lines_and_spaces_are_accepted():
    m = parse_map("# comment\n\n1 1\n0 0\n")

    assert m.domain_in_image_order == [0, 1]


def test_rational_domain_values():
    m = parse_map("1/2\t0\n-3/4\t1\n")

    assert m.domain_in_image_order == [Fraction(1, 2), Fraction(-3, 4)]


@pytest.mark.parametrize(
    "text, line_number",
    [
        ("0\t0\n1\n", 2),
        ("0\t0\nx\t1\n", 2),
        ("0\tzero\n", 1),
        ("0\t0\t0\t0\n", 1),
        ('{"kind": "entry", "domain": "0"\n', 1),
        ("[1, 2]\n", 1),
    ],
)
def test_malformed_lines_report_their_line_number(text, line_number):
    with pytest.raises(MapFormatError) as exc_info:
        parse_map(text)
    assert exc_info.value.line_number == line_number, str(exc_info.value)


def test_negative_rank_in_json_line_is_rejected():
    with pytest.raises(MapFormatError):
        parse_map('{"kind": "entry", "domain": "0", "rank": -1}\n')


def test_repeated_domain_value_is_a_format_error():
    with pytest.raises(MapFormatError) as exc_info:
        parse_map("0\t0\n0\t1\n")
    assert exc_info.value.line_number == 0


def test_image_outside_the_order_is_rejected(unit_closed):
    with pytest.raises(MapFormatError) as exc_info:
        parse_map("0\t0\t0\n1\t1\t2\n", unit_closed)
    assert exc_info.value.line_number == 2


def test_header_lines_are_skipped_in_json_lines():
    text = (
        '{"kind": "header", "source": "N", "order": "q-standard", "depth": 0, '
        '"points": 1, "coverage_cursor": 1}\n'
        '{"kind": "entry", "domain": "0", "rank": 0}\n'
    )

    assert parse_map(text).domain_in_image_order == [0]


def test_read_map(tmp_path):
    path = tmp_path / "map.tsv"
    path.write_text(BIT_REVERSAL_TSV, encoding="utf-8")

    assert len(read_map(path)) == 8

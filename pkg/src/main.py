"""apforder: command-line entry point.

Builds and checks finite prefixes of chaotic (AP-free) and binary bijections
from ℕ, ℤ and ℚ into countable total orders.

Subcommands:
- ``construct``: emit the depth-n prefix of the ℕ/ℤ/ℚ construction
- ``verify``: classify a finite map as binary, chaotic-only or not chaotic
- ``qseq`` / ``rseq`` / ``decompose``: the 2-adic generator sequences
- ``block-search``: extension-blocking search from a finite pattern
- ``negative-run``: construction into an order that should refuse it
- ``search-isolated``: look for an isolated point of an order
- ``shift-lemma``: check the translate lemma on a finite set

Results go to stdout (TSV by default, ``--format json-lines``); logs and
diagnostics go to stderr. Exit codes: 0 ok, 1 usage or bad input, 2 map is
chaotic but not binary, 3 map is not chaotic, 4 search budget exceeded,
5 search inconclusive.

Usage::

    python -m src.main construct --source N --order q-standard --depth 3
    python -m src.main verify prefix.tsv
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Iterator, Sequence
from pathlib import Path
from typing import Any, NoReturn

from src.config import get_settings

# ---------------------------------------------------------------------------
# Logging setup  (must happen before services are imported)
# ---------------------------------------------------------------------------

_settings = get_settings()
logging.basicConfig(
    level=getattr(logging, _settings.log_level.upper(), logging.INFO),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%dT%H:%M:%S",
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Service imports
# ---------------------------------------------------------------------------

from pydantic import ValidationError  # noqa: E402

from src.exceptions import (  # noqa: E402
    BudgetExceededError,
    ConstructionInvariantError,
    InjectivityError,
    MapFormatError,
    OrderDescriptionError,
    PreconditionError,
    QSequenceCapError,
    SearchLimitError,
    UnexpectedSuccessError,
    UnknownOrderError,
)
from src.schemas.records import (  # noqa: E402
    OutcomeRecord,
    SequenceTermRecord,
    VerificationRecord,
)
from src.schemas.run_config import Command, RunConfig  # noqa: E402
from src.services.constructor import construct_prefix  # noqa: E402
from src.services.dyadic_basis import (  # noqa: E402
    RSequence,
    build_q_sequence,
    check_shift_lemma,
    decompose,
    decompose_extending,
)
from src.services.emitter import (  # noqa: E402
    dump_records,
    emit_audit,
    emit_prefix,
    parse_map,
    write_text,
)
from src.services.onlyif_checks import (  # noqa: E402
    PartialArrangement,
    extension_search,
    negative_isolated_run,
    violation_progression,
)
from src.services.order_loader import resolve_order  # noqa: E402
from src.services.order_oracle import (  # noqa: E402
    BuiltinOrder,
    SearchBudget,
    Source,
    admissible_sources,
    builtin_order,
    search_isolated_point,
)
from src.services.rational_core import format_rational, ord2, parse_rational  # noqa: E402
from src.services.verifier import MapVerifier, find_binary_violation  # noqa: E402

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHAOTIC_ONLY = 2
EXIT_NOT_CHAOTIC = 3
EXIT_BUDGET_EXCEEDED = 4
EXIT_INCONCLUSIVE = 5

PROG = "apforder"


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class UsageError(Exception):
    """Bad command line; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser; shared flags are accepted before or after the subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=["tsv", "json-lines"],
        default=argparse.SUPPRESS,
        help="output format (default: tsv)",
    )
    common.add_argument(
        "--log-level", dest="log_level", default=argparse.SUPPRESS, help="override LOG_LEVEL"
    )

    parser = _Parser(prog=PROG, description="AP-free orderings of N, Z and Q", parents=[common])
    parser.add_argument(
        "--version", action="store_true", help="print the version and the built-in order catalog"
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("construct", parents=[common], help="emit a construction prefix")
    p.add_argument("--source", help="N, Z or Q")
    p.add_argument("--order", help="built-in order name or description file")
    p.add_argument("--depth", type=int)
    p.add_argument("--budget", type=int, help="enumeration steps per point search")
    p.add_argument("--emit", help="write the prefix here instead of stdout")
    p.add_argument("--audit", help="write the per-step audit (JSON lines) here")

    p = sub.add_parser("verify", parents=[common], help="classify a finite map")
    p.add_argument("input", nargs="?", default="-", help="map file, '-' for stdin")
    p.add_argument("--order", help="read the image column under this order")

    p = sub.add_parser("qseq", parents=[common], help="print the greedy q-sequence")
    p.add_argument("--count", type=int)

    p = sub.add_parser("rseq", parents=[common], help="print an r-sequence")
    p.add_argument("--count", type=int)
    p.add_argument("--source", default="Q", help="N, Z or Q (default: Q)")

    p = sub.add_parser("decompose", parents=[common], help="write r as a sum of r-terms")
    p.add_argument("--r", help="rational in p/q form")
    p.add_argument("--depth", type=int, help="r-sequence length")
    p.add_argument("--extend", action="store_true", help="grow the sequence up to --depth terms")

    p = sub.add_parser("block-search", parents=[common], help="extension-blocking search")
    p.add_argument("--pattern", help="domain in ascending image order, e.g. 2,3,0,1")
    p.add_argument("--max-depth", dest="max_depth", type=int, help="target size M")
    p.add_argument("--nodes", type=int, help="node budget")

    p = sub.add_parser("negative-run", parents=[common], help="construct where it must fail")
    p.add_argument("--source", help="N, Z or Q")
    p.add_argument("--order", help="built-in order name or description file")
    p.add_argument("--depth", type=int)
    p.add_argument("--budget", type=int, help="enumeration steps per point search")

    p = sub.add_parser("search-isolated", parents=[common], help="probe for isolated points")
    p.add_argument("--order", help="built-in order name or description file")
    p.add_argument("--depth", type=int, help="number of enumerated points to sample")
    p.add_argument("--budget", type=int, help="steps per emptiness probe")

    p = sub.add_parser("shift-lemma", parents=[common], help="check the translate lemma")
    p.add_argument("--set", dest="points", help="comma-separated rationals")
    p.add_argument("--r", help="shift in p/q form")
    return parser


def _config_from_namespace(ns: argparse.Namespace) -> RunConfig:
    values = {
        key: value
        for key, value in vars(ns).items()
        if key != "version" and value is not None
    }
    try:
        return RunConfig.model_validate(values)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        message = first["msg"].removeprefix("Value error, ")
        raise UsageError(f"{PROG}: {location + ': ' if location else ''}{message}") from exc


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _text(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (list, tuple)):
        return ",".join(_text(item) for item in value) if value else "-"
    return str(value)


def _flatten(prefix: str, value: Any) -> Iterator[tuple[str, str]]:
    if isinstance(value, dict):
        for key, inner in value.items():
            yield from _flatten(f"{prefix}.{key}" if prefix else key, inner)
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, inner in enumerate(value):
            yield from _flatten(f"{prefix}.{i}", inner)
    else:
        yield prefix, _text(value)


def _write_outcome(config: RunConfig, outcome: str, details: dict[str, Any]) -> None:
    if config.output_format == "json-lines":
        record = OutcomeRecord(command=config.command.value, outcome=outcome, details=details)
        sys.stdout.write(dump_records([record]))
        return
    lines = [f"outcome\t{outcome}"]
    lines.extend(f"{key}\t{value}" for key, value in _flatten("", details))
    sys.stdout.write("\n".join(lines) + "\n")


def _budget(config: RunConfig) -> SearchBudget | None:
    return SearchBudget(config.budget) if config.budget else None


def _sources_text(sources: frozenset[Source]) -> str:
    return ",".join(s.value for s in Source if s in sources) or "-"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _construct(config: RunConfig) -> int:
    order = resolve_order(config.order or "")
    state = construct_prefix(Source(config.source), order, config.depth or 0, _budget(config))
    text = emit_prefix(state, config.output_format)
    if config.emit is not None:
        write_text(config.emit, text)
    else:
        sys.stdout.write(text)
    if config.audit is not None:
        write_text(config.audit, emit_audit(state))
    return EXIT_OK


def _verify(config: RunConfig) -> int:
    source = config.input or "-"
    if source == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise MapFormatError(f"cannot read {source}: {exc}") from exc
    order = resolve_order(config.order) if config.order else None
    report = MapVerifier().verify(parse_map(text, order))
    payload = report.to_dict()
    if config.output_format == "json-lines":
        sys.stdout.write(dump_records([VerificationRecord(**payload)]))
    else:
        lines = [
            f"classification\t{payload['classification']}",
            f"size\t{payload['size']}",
            f"three_ap\t{_text(payload['three_ap'])}",
            f"binary_violation\t{_text(payload['binary_violation'])}",
            f"maxmin_witness\t{_text(payload['maxmin_witness'])}",
        ]
        lines.extend(f"check.{c['name']}\t{c['status']}" for c in payload["checks"])
        sys.stdout.write("\n".join(lines) + "\n")
    if report.errored:
        print(f"{PROG}: error: a verification check failed internally", file=sys.stderr)
        return EXIT_USAGE
    return report.exit_code


def _qseq(config: RunConfig) -> int:
    qs = build_q_sequence(config.count or 0)
    records = [
        SequenceTermRecord(
            sequence="q",
            index=n,
            value=format_rational(q),
            ord2=n,
            source_index=qs.source_indices[n],
            subset=sorted(qs.subsets[n]),
        )
        for n, q in enumerate(qs.terms)
    ]
    if config.output_format == "json-lines":
        sys.stdout.write(dump_records(records))
    else:
        lines = ["# n\tq_n\tord2\tl_n\tA_n"]
        lines.extend(
            f"{r.index}\t{r.value}\t{r.ord2}\t{r.source_index}\t{_text(r.subset)}"
            for r in records
        )
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _rseq(config: RunConfig) -> int:
    count = config.count or 0
    source = Source(config.source or "Q")
    if source is Source.N:
        rs = RSequence.natural(count)
    elif source is Source.Z:
        rs = RSequence.integer(count)
    else:
        rs = RSequence.from_q_sequence(build_q_sequence((count + 1) // 2), count)
    records = [
        SequenceTermRecord(
            sequence="r", index=n, value=format_rational(r), ord2=int(ord2(r))
        )
        for n, r in enumerate(rs.terms)
    ]
    if config.output_format == "json-lines":
        sys.stdout.write(dump_records(records))
    else:
        lines = [f"# source={source.value}", "# n\tr_n\tord2"]
        lines.extend(f"{r.index}\t{r.value}\t{r.ord2}" for r in records)
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _decompose(config: RunConfig) -> int:
    r = parse_rational(config.r or "")
    length = config.depth or 0
    if config.extend:
        result, rs = decompose_extending(r, length)
    else:
        rs = RSequence.from_q_sequence(build_q_sequence((length + 1) // 2), length)
        result = decompose(r, rs)
    details = result.to_dict()
    details["length"] = len(rs)
    details["terms"] = [format_rational(rs[i]) for i in sorted(result.indices)]
    _write_outcome(config, result.status.value, details)
    return EXIT_OK if result.is_complete else EXIT_INCONCLUSIVE


def _block_search(config: RunConfig) -> int:
    pattern = PartialArrangement(tuple(config.pattern_values()))
    result = extension_search(pattern, config.max_depth or 0, config.nodes)
    details = result.to_dict()
    details.pop("outcome")
    violation = find_binary_violation(pattern.to_map())
    if violation is not None:
        details["binary_violation"] = [format_rational(x) for x in violation]
        details["progression"] = violation_progression(*violation).to_dict()
    _write_outcome(config, result.outcome.value, details)
    return EXIT_OK


def _negative_run(config: RunConfig) -> int:
    order = resolve_order(config.order or "")
    report = negative_isolated_run(order, config.source or "", config.depth or 0, _budget(config))
    details = report.to_dict()
    details.pop("outcome")
    _write_outcome(config, report.outcome.value, details)
    return EXIT_OK


def _search_isolated(config: RunConfig) -> int:
    order = resolve_order(config.order or "")
    depth = config.depth if config.depth is not None else _settings.isolation_probe_depth
    witness = search_isolated_point(order, depth, _budget(config))
    details: dict[str, Any] = {
        "order": order.name,
        "sample": depth,
        "declared_isolated_points": order.properties.has_isolated_points,
        "admissible_sources": _sources_text(admissible_sources(order)),
        "point": None,
        "case": None,
        "x0": None,
        "x1": None,
    }
    if witness is not None:
        details.update(
            point=format_rational(witness.point),
            case=witness.case.value,
            x0=format_rational(witness.x0),
            x1=None if witness.x1 is None else format_rational(witness.x1),
        )
    _write_outcome(config, "found" if witness is not None else "none", details)
    return EXIT_OK


def _shift_lemma(config: RunConfig) -> int:
    report = check_shift_lemma(config.point_values(), parse_rational(config.r or ""))
    details = report.to_dict()
    passed = details.pop("passed")
    _write_outcome(config, "passed" if passed else "failed", details)
    return EXIT_OK if passed else EXIT_NOT_CHAOTIC


_HANDLERS: dict[Command, Callable[[RunConfig], int]] = {
    Command.CONSTRUCT: _construct,
    Command.VERIFY: _verify,
    Command.QSEQ: _qseq,
    Command.RSEQ: _rseq,
    Command.DECOMPOSE: _decompose,
    Command.BLOCK_SEARCH: _block_search,
    Command.NEGATIVE_RUN: _negative_run,
    Command.SEARCH_ISOLATED: _search_isolated,
    Command.SHIFT_LEMMA: _shift_lemma,
}


def print_version() -> None:
    """Version line followed by one line per built-in order."""
    lines = [f"{PROG} {_settings.app_version}"]
    for kind in BuiltinOrder:
        order = builtin_order(kind)
        lines.append(
            f"{order.name}\tadmissible={_sources_text(admissible_sources(order))}"
            f"\t{order.description}"
        )
    sys.stdout.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _fail(code: int, message: str) -> int:
    print(f"{PROG}: error: {message}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.version:
            print_version()
            return EXIT_OK
        if ns.command is None:
            raise UsageError(f"{PROG}: a command is required")
        config = _config_from_namespace(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    if config.log_level:
        logging.getLogger().setLevel(config.log_level)
    logger.debug("Running %s", config.command.value)

    try:
        return _HANDLERS[config.command](config)
    except BudgetExceededError as exc:
        lower = "-" if exc.lower is None else format_rational(exc.lower)
        upper = "-" if exc.upper is None else format_rational(exc.upper)
        return _fail(
            EXIT_BUDGET_EXCEEDED,
            f"budget exceeded at step {exc.step if exc.step is not None else '-'}: "
            f"no point in ({lower}, {upper}) after {exc.steps} steps",
        )
    except SearchLimitError as exc:
        return _fail(
            EXIT_INCONCLUSIVE,
            f"{exc} after {exc.nodes} nodes (largest arrangement {exc.depth_reached})",
        )
    except QSequenceCapError as exc:
        return _fail(EXIT_INCONCLUSIVE, f"{exc} (term {exc.index}, cap {exc.cap})")
    except UnexpectedSuccessError as exc:
        return _fail(EXIT_INCONCLUSIVE, str(exc))
    except MapFormatError as exc:
        where = f"line {exc.line_number}: " if exc.line_number else ""
        return _fail(EXIT_USAGE, f"{where}{exc}")
    except (
        UnknownOrderError,
        OrderDescriptionError,
        InjectivityError,
        PreconditionError,
        ValueError,
    ) as exc:
        return _fail(EXIT_USAGE, str(exc))
    except ConstructionInvariantError as exc:
        logger.error("Construction invariant failed: %s", exc)
        return _fail(EXIT_USAGE, f"internal error: {exc}")


if __name__ == "__main__":
    sys.exit(main())

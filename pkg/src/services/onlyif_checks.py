"""Finite evidence for the necessity direction.

* Odd-multiple equivalences: on a binary map whose domain holds the
  progression ``a, a+d, ..., a+Kd``, even offsets and odd offsets occupy two
  separated blocks of the image, so for odd ``t`` and even ``s``::

      f(a) ≺ f(a+d)  ⟺  f(a) ≺ f(a+td)  ⟺  f(a+sd) ≺ f(a+td)

* Extension blocking: a chaotic but non-binary arrangement of ``{0..N-1}``
  admits no chaotic completion. :func:`extension_search` inserts
  ``N, N+1, ...`` one value at a time into every gap and reports the size at
  which every branch dies.
* Isolated points: a construction into an order with an isolated point runs
  until some interval search walks its whole budget.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from src.config import get_settings
from src.exceptions import (
    BudgetExceededError,
    PreconditionError,
    ProgressionError,
    SearchLimitError,
    UnexpectedSuccessError,
)
from src.services.constructor import construct_prefix
from src.services.order_oracle import (
    CountableOrder,
    IsolationWitness,
    SearchBudget,
    Source,
    admissible_sources,
    search_isolated_point,
)
from src.services.rational_core import INFINITY, format_rational, ord2, power_of_two
from src.services.verifier import FiniteOrderedMap, Triple, find_monotone_3ap

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Arrangements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialArrangement:
    """An ordering of ``{0..N-1}``, listed in ascending image order.

    ``PartialArrangement((2, 3, 0, 1))`` stands for ``f(2) ≺ f(3) ≺ f(0) ≺ f(1)``.
    """

    sequence: tuple[int, ...]

    def __post_init__(self) -> None:
        size = len(self.sequence)
        if sorted(self.sequence) != list(range(size)):
            raise PreconditionError(
                f"arrangement {list(self.sequence)} is not a permutation of 0..{size - 1}"
            )

    @property
    def size(self) -> int:
        return len(self.sequence)

    def rank(self, value: int) -> int:
        return self.sequence.index(value)

    def to_map(self) -> FiniteOrderedMap:
        return FiniteOrderedMap.from_image_order(self.sequence)

    def restricted(self, size: int) -> PartialArrangement:
        """Relative order of ``0..size-1``."""
        return PartialArrangement(tuple(v for v in self.sequence if v < size))

    def pattern(self) -> str:
        return ",".join(str(v) for v in self.sequence)


# ---------------------------------------------------------------------------
# Odd-multiple equivalences
# ---------------------------------------------------------------------------


@dataclass
class OddMultipleReport:
    """Counterexamples are ``(s, t)`` offsets; ``s = 0`` is the first equivalence."""

    a: Fraction
    d: Fraction
    k: int
    checked: int = 0
    counterexamples: list[tuple[int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def check_odd_multiple_lemmas(
    m: FiniteOrderedMap, a: Fraction, d: Fraction, k: int
) -> OddMultipleReport:
    """Check both odd-multiple equivalences on ``a, a+d, ..., a+kd``.

    For every odd ``t <= k`` and even ``s <= k`` the order of ``f(a)`` and
    ``f(a+d)`` must agree with the order of ``f(a+sd)`` and ``f(a+td)``
    (``s = 0`` gives the comparison of ``f(a)`` with ``f(a+td)``).

    Raises:
        ProgressionError: If some ``a + id`` is missing from the domain.
        PreconditionError: If ``d`` is zero or ``k < 1``.
    """
    a, d = Fraction(a), Fraction(d)
    if d == 0 or k < 1:
        raise PreconditionError("need d != 0 and K >= 1")
    for i in range(k + 1):
        if a + i * d not in m:
            missing = a + i * d
            raise ProgressionError(
                f"{format_rational(missing)} = a + {i}d is not in the domain", missing=missing
            )
    report = OddMultipleReport(a=a, d=d, k=k)
    precedes = m.order.precedes
    image = m.image_of
    reference = precedes(image(a), image(a + d))
    for s in range(0, k + 1, 2):
        for t in range(1, k + 1, 2):
            report.checked += 1
            if precedes(image(a + s * d), image(a + t * d)) != reference:
                report.counterexamples.append((s, t))
    return report


@dataclass
class SweepReport:
    progressions: int = 0
    checked: int = 0
    counterexamples: list[tuple[Fraction, Fraction, int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def sweep_odd_multiple_lemmas(m: FiniteOrderedMap, min_length: int = 3) -> SweepReport:
    """Run :func:`check_odd_multiple_lemmas` on every maximal progression in the domain.

    For each positive difference ``d`` of two domain points and each start
    ``a`` with ``a − d`` outside the domain, ``K`` is as large as the domain
    allows; progressions with fewer than ``min_length`` points are skipped.
    """
    domain = sorted(m.domain)
    members = set(domain)
    differences = sorted({b - a for i, a in enumerate(domain) for b in domain[i + 1:]})
    report = SweepReport()
    for d in differences:
        for a in domain:
            if a - d in members:
                continue
            k = 0
            while a + (k + 1) * d in members:
                k += 1
            if k + 1 < min_length:
                continue
            result = check_odd_multiple_lemmas(m, a, d, k)
            report.progressions += 1
            report.checked += result.checked
            report.counterexamples.extend((a, d, s, t) for s, t in result.counterexamples)
    logger.info(
        "Odd-multiple sweep: %d progressions, %d equivalences, %d counterexamples",
        report.progressions,
        report.checked,
        len(report.counterexamples),
    )
    return report


# ---------------------------------------------------------------------------
# Extension blocking
# ---------------------------------------------------------------------------


class ExtensionOutcome(str, Enum):
    EXTENDED = "extended"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class ExtensionResult:
    """Outcome of :func:`extension_search`.

    Attributes:
        outcome: EXTENDED or BLOCKED.
        target_size: The requested ``M``.
        witness: A chaotic arrangement of ``{0..M-1}`` (EXTENDED).
        blocking_depth: Smallest size with no chaotic extension (BLOCKED).
        nodes: Insertions tried.
        elapsed_seconds: Wall time.
    """

    outcome: ExtensionOutcome
    target_size: int
    witness: Optional[PartialArrangement] = None
    blocking_depth: Optional[int] = None
    nodes: int = 0
    elapsed_seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "target_size": self.target_size,
            "witness": None if self.witness is None else list(self.witness.sequence),
            "blocking_depth": self.blocking_depth,
            "nodes": self.nodes,
        }


def _creates_monotone_ap(arrangement: list[int], value: int) -> bool:
    """Whether ``value``, the largest element, closes a monotone AP ``(2b − value, b, value)``."""
    position = {v: i for i, v in enumerate(arrangement)}
    p_top = position[value]
    for b in range((value + 1) // 2, value):
        c = 2 * b - value
        p_b, p_c = position[b], position[c]
        if p_c < p_b < p_top or p_c > p_b > p_top:
            return True
    return False


class _InsertionSearch:
    def __init__(self, target_size: int, node_budget: int, progress_interval: int) -> None:
        self.target_size = target_size
        self.node_budget = node_budget
        self.progress_interval = progress_interval
        self.nodes = 0
        self.largest = 0
        self.leaves = 0

    def _visit(self, size: int) -> None:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise SearchLimitError(
                f"extension search spent its {self.node_budget} nodes",
                nodes=self.nodes - 1,
                depth_reached=self.largest,
            )
        if self.nodes % self.progress_interval == 0:
            logger.info(
                "Extension search: %d nodes, largest arrangement %d", self.nodes, self.largest
            )

    def first(self, arrangement: list[int]) -> Optional[list[int]]:
        """Depth-first, gaps left to right; return the first complete arrangement."""
        size = len(arrangement)
        self.largest = max(self.largest, size)
        if size == self.target_size:
            return list(arrangement)
        for gap in range(size + 1):
            self._visit(size)
            arrangement.insert(gap, size)
            if not _creates_monotone_ap(arrangement, size):
                found = self.first(arrangement)
                if found is not None:
                    return found
            del arrangement[gap]
        return None

    def count(self, arrangement: list[int]) -> int:
        size = len(arrangement)
        if size == self.target_size:
            return 1
        total = 0
        for gap in range(size + 1):
            self._visit(size)
            arrangement.insert(gap, size)
            if not _creates_monotone_ap(arrangement, size):
                total += self.count(arrangement)
            del arrangement[gap]
        return total


def extension_search(
    p: PartialArrangement,
    target_size: int,
    node_budget: int | None = None,
    progress_interval: int | None = None,
) -> ExtensionResult:
    """Look for a chaotic arrangement of ``{0..M-1}`` extending ``p``.

    Args:
        p: Chaotic arrangement of ``{0..N-1}``.
        target_size: ``M >= N``.
        node_budget: Insertions allowed; defaults to ``Settings.node_budget``.
        progress_interval: Nodes between progress log lines.

    Returns:
        EXTENDED with the first witness in search order, or BLOCKED with
        ``blocking_depth`` one above the largest extendable size.

    Raises:
        PreconditionError: If ``p`` is not chaotic or ``M < N``.
        SearchLimitError: If the node budget runs out (inconclusive).
    """
    settings = get_settings()
    if target_size < p.size:
        raise PreconditionError(f"M = {target_size} is below the pattern size {p.size}")
    witness_ap = find_monotone_3ap(p.to_map())
    if witness_ap is not None:
        raise PreconditionError(
            f"pattern {p.pattern()} is not chaotic: "
            f"{','.join(format_rational(x) for x in witness_ap)}"
        )
    search = _InsertionSearch(
        target_size,
        node_budget or settings.node_budget,
        progress_interval or settings.progress_interval,
    )
    start = time.monotonic()
    logger.info("Extension search from %r to size %d", p.pattern(), target_size)
    found = search.first(list(p.sequence))
    elapsed = time.monotonic() - start
    if found is not None:
        logger.info("Extended to size %d after %d nodes", target_size, search.nodes)
        return ExtensionResult(
            ExtensionOutcome.EXTENDED,
            target_size,
            witness=PartialArrangement(tuple(found)),
            nodes=search.nodes,
            elapsed_seconds=elapsed,
        )
    logger.info(
        "Blocked: no chaotic extension beyond size %d (%d nodes)", search.largest, search.nodes
    )
    return ExtensionResult(
        ExtensionOutcome.BLOCKED,
        target_size,
        blocking_depth=search.largest + 1,
        nodes=search.nodes,
        elapsed_seconds=elapsed,
    )


def count_chaotic_arrangements(n: int, node_budget: int | None = None) -> int:
    """Number of chaotic orderings of ``{0..n-1}`` (1, 2, 4, 10 for n = 1..4)."""
    if n < 0:
        raise PreconditionError("n must be non-negative")
    settings = get_settings()
    search = _InsertionSearch(
        n, node_budget or settings.node_budget, settings.progress_interval
    )
    return search.count([])


# ---------------------------------------------------------------------------
# Non-binary triples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ViolationProgression:
    """Progression through a non-binary triple.

    ``base + multiples[i] * d`` recovers ``(a, b, c)``; ``n`` is the shared
    ord2 and ``m`` the smallest positive integer making ``2**-n * m * (b − a)``
    and ``2**-n * m * (c − b)`` integers, with ``d = 2**n / m``.
    """

    triple: Triple
    n: int
    m: int
    d: Fraction
    base: Fraction
    multiples: tuple[int, int, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "triple": [format_rational(x) for x in self.triple],
            "n": self.n,
            "m": self.m,
            "d": format_rational(self.d),
            "base": format_rational(self.base),
            "multiples": list(self.multiples),
        }


def violation_progression(a: Fraction, b: Fraction, c: Fraction) -> ViolationProgression:
    """Build the progression the chaotic-implies-binary argument runs on.

    Raises:
        PreconditionError: If the points repeat or ``ord2(b − a) != ord2(c − b)``.
    """
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    first, second = ord2(b - a), ord2(c - b)
    if first == INFINITY or second == INFINITY or first != second:
        raise PreconditionError(
            f"({format_rational(a)}, {format_rational(b)}, {format_rational(c)}) "
            "has no common finite ord2"
        )
    n = int(first)
    scale = power_of_two(-n)
    m = math.lcm((scale * (b - a)).denominator, (scale * (c - b)).denominator)
    d = power_of_two(n) / m
    base = min(a, b, c)
    multiples = tuple((x - base) / d for x in (a, b, c))
    return ViolationProgression(
        triple=(a, b, c),
        n=n,
        m=m,
        d=d,
        base=base,
        multiples=(
            int(multiples[0]),
            int(multiples[1]),
            int(multiples[2]),
        ),
    )


# ---------------------------------------------------------------------------
# Isolated points
# ---------------------------------------------------------------------------


def fresh_point(c: Fraction, others: Iterable[Fraction]) -> Fraction:
    """Return ``c + 2**n`` with ``n >= 0`` and ``ord2(2**n)`` above every ``ord2(x − c)``."""
    c = Fraction(c)
    orders = [ord2(Fraction(x) - c) for x in others if Fraction(x) != c]
    n = max([0, *(int(value) + 1 for value in orders)])
    return c + power_of_two(n)


def isolated_point_contradiction(
    m: FiniteOrderedMap, a: Fraction, b: Fraction, c: Fraction
) -> Optional[Triple]:
    """Binary violation forced when ``f(c)`` is the only image between ``f(a)`` and ``f(b)``.

    With ``c' = fresh_point(c, (a, b))`` in the domain, ``f(c')`` falls below
    ``f(a)`` or above ``f(b)``; the returned triple is ``(c', a, c)`` resp.
    ``(c, b, c')``. ``None`` when ``c'`` is outside the domain.

    Raises:
        PreconditionError: If ``f(a) ≺ f(c) ≺ f(b)`` are not consecutive images.
    """
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    pa, pc, pb = m.position(a), m.position(c), m.position(b)
    if not (pc == pa + 1 and pb == pc + 1):
        raise PreconditionError("f(a), f(c), f(b) must be consecutive images")
    c_fresh = fresh_point(c, (a, b))
    if c_fresh not in m:
        return None
    if m.position(c_fresh) < pa:
        return c_fresh, a, c
    return c, b, c_fresh


class NegativeOutcome(str, Enum):
    BUDGET_EXCEEDED = "budget-exceeded"
    COMPLETED_ISOLATED_UNCOVERED = "completed-isolated-uncovered"


@dataclass
class NegativeRunReport:
    """What happened when constructing into an order that should refuse it."""

    order: str
    source: Source
    depth: int
    outcome: NegativeOutcome
    step: Optional[int] = None
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None
    points_built: int = 0
    isolation: Optional[IsolationWitness] = None

    def to_dict(self) -> dict[str, Any]:
        def _text(x: Optional[Fraction]) -> Optional[str]:
            return None if x is None else format_rational(x)

        isolation = None
        if self.isolation is not None:
            isolation = {
                "point": format_rational(self.isolation.point),
                "case": self.isolation.case.value,
                "x0": format_rational(self.isolation.x0),
                "x1": _text(self.isolation.x1),
            }
        return {
            "order": self.order,
            "source": self.source.value,
            "depth": self.depth,
            "outcome": self.outcome.value,
            "step": self.step,
            "lower": _text(self.lower),
            "upper": _text(self.upper),
            "points_built": self.points_built,
            "isolation": isolation,
        }


def negative_isolated_run(
    order: CountableOrder,
    source: Source | str,
    depth: int,
    budget: SearchBudget | None = None,
    probe_depth: int | None = None,
) -> NegativeRunReport:
    """Construct into an order whose declared properties exclude ``source`` and report the failure.

    A run that completes is inspected with :func:`search_isolated_point`; an
    isolated point outside the image is recorded, anything else is unexpected.

    Raises:
        PreconditionError: If the order admits ``source``.
        UnexpectedSuccessError: If the run completes with no uncovered isolated point.
    """
    source = Source(source)
    if source in admissible_sources(order):
        raise PreconditionError(
            f"{order.name} admits a binary bijection from {source.value}; nothing to refute"
        )
    try:
        state = construct_prefix(source, order, depth, budget, check_declared=False)
    except BudgetExceededError as exc:
        partial = exc.partial_state
        report = NegativeRunReport(
            order=order.name,
            source=source,
            depth=depth,
            outcome=NegativeOutcome.BUDGET_EXCEEDED,
            step=exc.step,
            lower=exc.lower,
            upper=exc.upper,
            points_built=0 if partial is None else len(partial.final_map),
        )
        logger.info("Negative run on %s blocked at step %s", order.name, exc.step)
        return report

    probe_depth = probe_depth or get_settings().isolation_probe_depth
    witness = search_isolated_point(order, probe_depth)
    report = NegativeRunReport(
        order=order.name,
        source=source,
        depth=depth,
        outcome=NegativeOutcome.COMPLETED_ISOLATED_UNCOVERED,
        points_built=len(state.final_map),
        isolation=witness,
    )
    if witness is None or witness.point in state.final_map.image:
        raise UnexpectedSuccessError(
            f"construction into {order.name} completed {depth} steps without the expected failure",
            report=report,
        )
    logger.info(
        "Negative run on %s completed; isolated point %s stays outside the image",
        order.name,
        format_rational(witness.point),
    )
    return report


def arrangement_from_map(m: FiniteOrderedMap) -> PartialArrangement:
    """Arrangement of a map whose domain is ``{0..N-1}``."""
    values: Sequence[Fraction] = m.domain_in_image_order
    if any(v.denominator != 1 for v in values):
        raise PreconditionError("domain must consist of integers")
    return PartialArrangement(tuple(int(v) for v in values))

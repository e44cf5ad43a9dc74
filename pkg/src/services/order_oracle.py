"""Countable total orders given by an enumeration and a comparator.

A :class:`CountableOrder` stands for a countably infinite totally ordered set
``(X, ≼)``: ``point(k)`` is the fixed bijection ``g: ℕ → X`` and
``compare`` is the order. Points of every order are rationals; an order is a
finite union of *pieces* (rationals or integers restricted to an interval)
read in the standard or in the reversed direction.

Enumerations
------------
The canonical enumeration of ℚ lists ``0`` first, then reduced fractions
``p/q`` by increasing ``|p| + q`` with ties broken by ascending ``p``::

    0, -1, 1, -2, -1/2, 1/2, 2, -3, -1/3, 1/3, 3, ...

Restricted orders filter it. Orders made only of integer pieces walk
``0, -1, 1, -2, 2, ...`` directly, which is the same filtered sequence.

Searches
--------
``find_strictly_between`` and friends return the first point in enumeration
order that satisfies strict bounds and avoids an exclusion set. In an order
without isolated points every nonempty open interval is infinite (a finite
nonempty one would contain an isolated point), so these searches terminate
for every interval the constructions ask about. A search that walks its
whole :class:`SearchBudget` raises :class:`BudgetExceededError`.
"""

from __future__ import annotations

import functools
import itertools
import logging
from collections.abc import Collection, Iterator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Any

from src.config import get_settings
from src.exceptions import BudgetExceededError, PreconditionError, UnknownOrderError
from src.schemas.order import (
    ComparatorSpec,
    IntervalComparator,
    OrderDescription,
    ReversedComparator,
    StandardComparator,
)
from src.services.rational_core import format_rational, parse_rational

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


def rational_enumeration(odd_denominators_only: bool = False) -> Iterator[Fraction]:
    """Yield every rational once, in the canonical diagonal order.

    Args:
        odd_denominators_only: Restrict to Z_(2) (reduced fractions with odd
            denominator); the order among the kept fractions is unchanged.
    """
    yield Fraction(0)
    for height in itertools.count(2):
        for p in range(-(height - 1), height):
            if p == 0:
                continue
            q = height - abs(p)
            if odd_denominators_only and q % 2 == 0:
                continue
            if gcd(abs(p), q) == 1:
                yield Fraction(p, q)


def integer_enumeration() -> Iterator[Fraction]:
    """Yield ``0, -1, 1, -2, 2, ...``."""
    yield Fraction(0)
    for n in itertools.count(1):
        yield Fraction(-n)
        yield Fraction(n)


# ---------------------------------------------------------------------------
# Order building blocks
# ---------------------------------------------------------------------------


class Comparison(Enum):
    """Outcome of comparing two points."""

    LESS = -1
    EQUAL = 0
    GREATER = 1


class Carrier(str, Enum):
    RATIONALS = "rationals"
    INTEGERS = "integers"


class Source(str, Enum):
    """Domains the constructions start from."""

    N = "N"
    Z = "Z"
    Q = "Q"


@dataclass(frozen=True)
class Interval:
    """An interval of rationals; ``None`` ends are unbounded."""

    lower: Fraction | None = None
    upper: Fraction | None = None
    lower_closed: bool = True
    upper_closed: bool = True

    def contains(self, x: Fraction) -> bool:
        if self.lower is not None:
            if x < self.lower or (x == self.lower and not self.lower_closed):
                return False
        if self.upper is not None:
            if x > self.upper or (x == self.upper and not self.upper_closed):
                return False
        return True

    def intersect(self, other: Interval) -> Interval:
        lower, lower_closed = self.lower, self.lower_closed
        if other.lower is not None and (
            lower is None
            or other.lower > lower
            or (other.lower == lower and not other.lower_closed)
        ):
            lower, lower_closed = other.lower, other.lower_closed
        upper, upper_closed = self.upper, self.upper_closed
        if other.upper is not None and (
            upper is None
            or other.upper < upper
            or (other.upper == upper and not other.upper_closed)
        ):
            upper, upper_closed = other.upper, other.upper_closed
        return Interval(lower, upper, lower_closed, upper_closed)

    @property
    def is_unbounded(self) -> bool:
        return self.lower is None or self.upper is None

    def describe(self) -> str:
        left = "(-inf" if self.lower is None else (
            ("[" if self.lower_closed else "(") + format_rational(self.lower)
        )
        right = "+inf)" if self.upper is None else (
            format_rational(self.upper) + ("]" if self.upper_closed else ")")
        )
        return f"{left}, {right}"


@dataclass(frozen=True)
class Piece:
    """Rationals or integers restricted to an interval."""

    carrier: Carrier = Carrier.RATIONALS
    interval: Interval = field(default_factory=Interval)

    def contains(self, x: Fraction) -> bool:
        if self.carrier is Carrier.INTEGERS and x.denominator != 1:
            return False
        return self.interval.contains(x)

    def is_infinite(self) -> bool:
        if self.interval.is_unbounded:
            return True
        if self.carrier is Carrier.INTEGERS:
            return False
        return self.interval.lower < self.interval.upper  # type: ignore[operator]


@dataclass(frozen=True)
class OrderProperties:
    """Declared (documented, not decided) properties of an order."""

    has_isolated_points: bool
    has_maximum: bool
    has_minimum: bool


@dataclass(frozen=True)
class SearchBudget:
    """Number of enumeration steps a single search may walk."""

    max_enumeration_index: int

    def __post_init__(self) -> None:
        if self.max_enumeration_index <= 0:
            raise PreconditionError(
                f"SearchBudget must be positive, got {self.max_enumeration_index}"
            )

    @classmethod
    def default(cls) -> SearchBudget:
        return cls(get_settings().search_budget)


# ---------------------------------------------------------------------------
# CountableOrder
# ---------------------------------------------------------------------------


class CountableOrder:
    """A countably infinite total order with a fixed enumeration.

    The first ``cache_limit`` enumerated points are materialized lazily and
    memoized; walks past them regenerate the tail from a fresh enumeration
    without storing it. Apart from that cache an instance never changes after
    construction.

    Args:
        name: Name used in CLI output and emitted headers.
        pieces: Pieces whose union is the underlying set.
        properties: Declared properties.
        descending: Read the standard order of the rationals backwards.
        description: Free-text description.
        cache_limit: Memoized prefix length; defaults to
            ``Settings.enumeration_cache_limit``.
    """

    def __init__(
        self,
        name: str,
        pieces: tuple[Piece, ...],
        properties: OrderProperties,
        descending: bool = False,
        description: str = "",
        cache_limit: int | None = None,
    ) -> None:
        if not pieces or not any(piece.is_infinite() for piece in pieces):
            raise PreconditionError(f"Order {name!r} must contain an infinite piece")
        self.name = name
        self.pieces = pieces
        self.properties = properties
        self.descending = descending
        self.description = description
        self.cache_limit = (
            cache_limit if cache_limit is not None else get_settings().enumeration_cache_limit
        )
        self._points: list[Fraction] = []
        self._positions: dict[Fraction, int] = {}
        self._stream: Iterator[Fraction] = self._enumerate()

    def __repr__(self) -> str:
        return f"CountableOrder({self.name!r})"

    def _enumerate(self) -> Iterator[Fraction]:
        if all(piece.carrier is Carrier.INTEGERS for piece in self.pieces):
            base = integer_enumeration()
        else:
            base = rational_enumeration()
        whole = any(
            piece.carrier is Carrier.RATIONALS and piece.interval == Interval()
            for piece in self.pieces
        )
        if whole:
            return base
        return (x for x in base if self.contains(x))

    # ------------------------------------------------------------------
    # Enumeration
    # ------------------------------------------------------------------

    @property
    def cached_points(self) -> int:
        return len(self._points)

    def point(self, index: int) -> Fraction:
        """Return ``g(index)``."""
        if index >= self.cache_limit:
            return next(itertools.islice(self._enumerate(), index, None))
        points = self._points
        while len(points) <= index:
            value = next(self._stream)
            self._positions[value] = len(points)
            points.append(value)
        return points[index]

    def walk(self, limit: int, start: int = 0) -> Iterator[Fraction]:
        """Yield ``g(start), ..., g(limit - 1)``."""
        cached = min(limit, self.cache_limit)
        for index in range(start, cached):
            yield self.point(index)
        if limit > cached:
            yield from itertools.islice(self._enumerate(), max(start, cached), limit)

    def prefix(self, count: int) -> list[Fraction]:
        """Return ``[g(0), ..., g(count - 1)]``."""
        if count <= self.cache_limit:
            if count > 0:
                self.point(count - 1)
            return self._points[:count]
        return list(self.walk(count))

    def index_of(self, x: Fraction, limit: int | None = None) -> int | None:
        """Return ``k`` with ``g(k) = x``, walking at most ``limit`` steps."""
        if x in self._positions:
            return self._positions[x]
        if not self.contains(x):
            return None
        limit = limit if limit is not None else get_settings().search_budget
        start = len(self._points)
        for index, point in enumerate(self.walk(limit, start), start):
            if point == x:
                return index
        return None

    # ------------------------------------------------------------------
    # Order
    # ------------------------------------------------------------------

    def contains(self, x: Fraction) -> bool:
        return any(piece.contains(x) for piece in self.pieces)

    def precedes(self, x: Fraction, y: Fraction) -> bool:
        """Return ``True`` when ``x ≺ y``."""
        return x > y if self.descending else x < y

    def compare(self, x: Fraction, y: Fraction) -> Comparison:
        if x == y:
            return Comparison.EQUAL
        return Comparison.LESS if self.precedes(x, y) else Comparison.GREATER

    def sort_key(self, x: Fraction) -> Fraction:
        """Key whose natural order is this order."""
        return -x if self.descending else x

    def greatest(self, points: Collection[Fraction]) -> Fraction:
        return max(points, key=self.sort_key)

    def least(self, points: Collection[Fraction]) -> Fraction:
        return min(points, key=self.sort_key)

    def reversed(self) -> CountableOrder:
        """Same enumeration, flipped comparator, maximum and minimum swapped."""
        props = self.properties
        return CountableOrder(
            name=f"{self.name}~reversed",
            pieces=self.pieces,
            properties=OrderProperties(
                has_isolated_points=props.has_isolated_points,
                has_maximum=props.has_minimum,
                has_minimum=props.has_maximum,
            ),
            descending=not self.descending,
            description=f"reverse of {self.name}",
            cache_limit=self.cache_limit,
        )


# ---------------------------------------------------------------------------
# Compiling combinator descriptions
# ---------------------------------------------------------------------------


def _compile(node: ComparatorSpec) -> tuple[list[Piece], bool]:
    """Return the pieces of ``node`` and whether it reads the rationals backwards."""
    if isinstance(node, StandardComparator):
        return [Piece(carrier=Carrier(node.carrier))], False
    if isinstance(node, ReversedComparator):
        pieces, descending = _compile(node.of)
        return pieces, not descending
    if isinstance(node, IntervalComparator):
        pieces, descending = _compile(node.of)
        window = Interval(
            None if node.lower is None else parse_rational(node.lower),
            None if node.upper is None else parse_rational(node.upper),
            node.lower_closed,
            node.upper_closed,
        )
        return [Piece(p.carrier, p.interval.intersect(window)) for p in pieces], descending
    compiled = [_compile(part) for part in node.of]
    directions = {descending for _, descending in compiled}
    if len(directions) != 1:
        raise PreconditionError("union members must share one direction")
    return [piece for pieces, _ in compiled for piece in pieces], directions.pop()


def _is_empty(piece: Piece) -> bool:
    interval = piece.interval
    if interval.lower is None or interval.upper is None:
        return False
    if interval.lower == interval.upper:
        return not (interval.lower_closed and interval.upper_closed) or not piece.contains(
            interval.lower
        )
    return interval.lower > interval.upper


def compile_description(description: OrderDescription) -> CountableOrder:
    """Build the order a validated description stands for.

    Raises:
        PreconditionError: If union members disagree on direction or no piece is infinite.
    """
    pieces, descending = _compile(description.comparator)
    declared = description.declared
    return CountableOrder(
        name=description.name,
        pieces=tuple(piece for piece in pieces if not _is_empty(piece)),
        properties=OrderProperties(
            has_isolated_points=declared.has_isolated_points,
            has_maximum=declared.has_maximum,
            has_minimum=declared.has_minimum,
        ),
        descending=descending,
        description=description.description,
    )


# ---------------------------------------------------------------------------
# Built-in orders
# ---------------------------------------------------------------------------


class BuiltinOrder(str, Enum):
    Q_STANDARD = "q-standard"
    Q_UNIT_CLOSED = "q-unit-closed"
    Q_UNIT_HALF_OPEN = "q-unit-half-open"
    Z_STANDARD = "z-standard"
    Q_PLUS_ISOLATED = "q-plus-isolated"


_STANDARD: dict[str, Any] = {"kind": "standard"}
_UNIT: dict[str, Any] = {"kind": "interval", "of": _STANDARD, "lower": "0", "upper": "1"}

BUILTIN_DESCRIPTIONS: dict[BuiltinOrder, dict[str, Any]] = {
    BuiltinOrder.Q_STANDARD: {
        "name": "q-standard",
        "description": "the rationals with the standard order",
        "comparator": _STANDARD,
        "declared": {"has_isolated_points": False, "has_maximum": False, "has_minimum": False},
    },
    BuiltinOrder.Q_UNIT_CLOSED: {
        "name": "q-unit-closed",
        "description": "rationals in [0, 1]",
        "comparator": _UNIT,
        "declared": {"has_isolated_points": False, "has_maximum": True, "has_minimum": True},
    },
    BuiltinOrder.Q_UNIT_HALF_OPEN: {
        "name": "q-unit-half-open",
        "description": "rationals in [0, 1)",
        "comparator": {**_UNIT, "upper_closed": False},
        "declared": {"has_isolated_points": False, "has_maximum": False, "has_minimum": True},
    },
    BuiltinOrder.Z_STANDARD: {
        "name": "z-standard",
        "description": "the integers; every point is isolated",
        "comparator": {"kind": "standard", "carrier": "integers"},
        "declared": {"has_isolated_points": True, "has_maximum": False, "has_minimum": False},
    },
    BuiltinOrder.Q_PLUS_ISOLATED: {
        "name": "q-plus-isolated",
        "description": "rationals in [0, 1] together with the isolated point 2",
        "comparator": {
            "kind": "union",
            "of": [_UNIT, {"kind": "interval", "of": _STANDARD, "lower": "2", "upper": "2"}],
        },
        "declared": {"has_isolated_points": True, "has_maximum": True, "has_minimum": True},
    },
}


@functools.lru_cache(maxsize=None)
def _cached_builtin(kind: BuiltinOrder) -> CountableOrder:
    return compile_description(OrderDescription.model_validate(BUILTIN_DESCRIPTIONS[kind]))


def builtin_order(name: BuiltinOrder | str) -> CountableOrder:
    """Return the built-in order called ``name``.

    Instances are shared so their enumeration caches are reused.

    Raises:
        UnknownOrderError: If ``name`` is not in the catalog.
    """
    try:
        kind = BuiltinOrder(name)
    except ValueError:
        try:
            kind = BuiltinOrder[str(name).upper().replace("-", "_")]
        except KeyError:
            raise UnknownOrderError(str(name)) from None
    return _cached_builtin(kind)


def admissible_sources(order: CountableOrder) -> frozenset[Source]:
    """Sources S with a chaotic bijection S → X, read off the declared properties.

    ℕ and ℤ need no isolated points; ℚ additionally needs no maximum or no minimum.
    """
    props = order.properties
    if props.has_isolated_points:
        return frozenset()
    sources = {Source.N, Source.Z}
    if not (props.has_maximum and props.has_minimum):
        sources.add(Source.Q)
    return frozenset(sources)


def order_axiom_problems(order: CountableOrder, count: int) -> list[str]:
    """Check the comparator and enumeration on the first ``count`` points.

    Sorting the sample and checking every pair against the sorted positions
    covers trichotomy and, on the sample, transitivity.

    Returns:
        Human-readable problems; empty when the sample is consistent.
    """
    problems: list[str] = []
    sample = order.prefix(count)
    if len(set(sample)) != len(sample):
        problems.append("enumeration repeats a point")
    for x in sample:
        if order.compare(x, x) is not Comparison.EQUAL or order.precedes(x, x):
            problems.append(f"comparator is not irreflexive at {format_rational(x)}")
        if not order.contains(x):
            problems.append(f"enumerated point {format_rational(x)} is outside the order")
    ranked = sorted(set(sample), key=order.sort_key)
    for i, x in enumerate(ranked):
        for y in ranked[i + 1:]:
            if order.compare(x, y) is not Comparison.LESS or order.compare(y, x) is not (
                Comparison.GREATER
            ):
                problems.append(
                    f"comparator disagrees with sorted position on "
                    f"{format_rational(x)}, {format_rational(y)}"
                )
    return problems


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------


def find_point(
    order: CountableOrder,
    lower: Fraction | None = None,
    upper: Fraction | None = None,
    exclude: Collection[Fraction] = frozenset(),
    budget: SearchBudget | None = None,
) -> Fraction:
    """Return the first enumerated point strictly between the given bounds.

    ``None`` bounds are dropped. Points in ``exclude`` are skipped.

    Raises:
        BudgetExceededError: If no point qualifies within the budget.
    """
    budget = budget or SearchBudget.default()
    precedes = order.precedes
    for index, candidate in enumerate(order.walk(budget.max_enumeration_index)):
        if candidate in exclude:
            continue
        if lower is not None and not precedes(lower, candidate):
            continue
        if upper is not None and not precedes(candidate, upper):
            continue
        logger.debug(
            "Found %s at index %d in (%s, %s) of %s",
            format_rational(candidate),
            index,
            _bound_text(lower),
            _bound_text(upper),
            order.name,
        )
        return candidate
    message = (
        f"No point of {order.name} found in ({_bound_text(lower)}, {_bound_text(upper)}) "
        f"within {budget.max_enumeration_index} enumeration steps"
    )
    raise BudgetExceededError(
        message, lower=lower, upper=upper, steps=budget.max_enumeration_index
    )


def find_strictly_between(
    order: CountableOrder,
    lower: Fraction,
    upper: Fraction,
    exclude: Collection[Fraction] = frozenset(),
    budget: SearchBudget | None = None,
) -> Fraction:
    """Return the first enumerated point ``x`` with ``lower ≺ x ≺ upper``, ``x ∉ exclude``.

    Raises:
        PreconditionError: If ``lower ≺ upper`` fails.
        BudgetExceededError: On a suspected isolated point or empty interval.
    """
    if not order.precedes(lower, upper):
        raise PreconditionError(
            f"find_strictly_between needs lower ≺ upper, got "
            f"{format_rational(lower)}, {format_rational(upper)}"
        )
    return find_point(order, lower, upper, exclude, budget)


def find_strictly_above(
    order: CountableOrder,
    lower: Fraction,
    exclude: Collection[Fraction] = frozenset(),
    budget: SearchBudget | None = None,
) -> Fraction:
    """Return the first enumerated point strictly above ``lower`` avoiding ``exclude``."""
    return find_point(order, lower, None, exclude, budget)


def find_strictly_below(
    order: CountableOrder,
    upper: Fraction,
    exclude: Collection[Fraction] = frozenset(),
    budget: SearchBudget | None = None,
) -> Fraction:
    """Return the first enumerated point strictly below ``upper`` avoiding ``exclude``."""
    return find_point(order, None, upper, exclude, budget)


def _bound_text(bound: Fraction | None) -> str:
    return "-" if bound is None else format_rational(bound)


# ---------------------------------------------------------------------------
# Isolated points
# ---------------------------------------------------------------------------


class IsolationCase(str, Enum):
    """The three ways a point can be isolated in the order topology."""

    LEFT_END = "i"  # {x ≺ x0} = {p}
    RIGHT_END = "ii"  # {x ≻ x0} = {p}
    INTERIOR = "iii"  # {x0 ≺ x ≺ x1} = {p}


@dataclass(frozen=True)
class IsolationWitness:
    """Evidence (not proof) that ``point`` is isolated.

    Attributes:
        point: The suspected isolated point p.
        case: Which of the three isolation patterns was observed.
        x0: Neighbour used as x0 (the successor of p in case (i)).
        x1: Upper neighbour in case (iii), else ``None``.
    """

    point: Fraction
    case: IsolationCase
    x0: Fraction
    x1: Fraction | None = None


def _height(x: Fraction) -> int:
    """``|p| + q``: the position class of ``x`` in the rational enumeration."""
    return abs(x.numerator) + x.denominator


def _probe_budget(
    base: SearchBudget, lower: Fraction | None, upper: Fraction | None
) -> SearchBudget:
    """Budget reaching every rational up to the height of the simplest interior point.

    Between ``lower`` and ``upper`` the mediant has height at most
    ``h(lower) + h(upper)``; on a ray ``anchor ± 1`` has height at most
    ``h(anchor) + 1``. At most ``H**2`` rationals have height ``<= H``.
    """
    if lower is not None and upper is not None:
        reach = _height(lower) + _height(upper)
    else:
        reach = _height(lower if lower is not None else upper) + 2  # type: ignore[arg-type]
    ceiling = get_settings().search_budget
    steps = max(base.max_enumeration_index, min(reach * reach, ceiling))
    return SearchBudget(steps)


def _simple_point(
    order: CountableOrder, lower: Fraction | None, upper: Fraction | None
) -> Fraction | None:
    """A point of ``order`` strictly inside the bounds that needs no walk, if one is at hand."""
    if lower is not None and upper is not None:
        candidates = [
            Fraction(lower.numerator + upper.numerator, lower.denominator + upper.denominator)
        ]
    else:
        anchor = lower if lower is not None else upper
        candidates = [anchor + 1, anchor - 1]  # type: ignore[operator]
    for x in candidates:
        if not order.contains(x):
            continue
        if lower is not None and not order.precedes(lower, x):
            continue
        if upper is not None and not order.precedes(x, upper):
            continue
        return x
    return None


def _looks_empty(
    order: CountableOrder,
    lower: Fraction | None,
    upper: Fraction | None,
    budget: SearchBudget,
) -> bool:
    if _simple_point(order, lower, upper) is not None:
        return False
    try:
        find_point(order, lower, upper, frozenset(), _probe_budget(budget, lower, upper))
    except BudgetExceededError:
        return True
    return False


def search_isolated_point(
    order: CountableOrder,
    depth: int,
    budget: SearchBudget | None = None,
) -> IsolationWitness | None:
    """Look for an isolated point among the first ``depth`` enumerated points.

    Each sampled point p is compared with its neighbours inside the sample;
    p is reported when bounded searches find nothing on the open sides that
    isolation requires. The first such p in enumeration order is returned.
    Absence of a witness proves nothing.

    Args:
        order: The order to probe.
        depth: Number of enumerated points to sample.
        budget: Minimum budget of each emptiness probe; defaults to
            ``Settings.isolation_probe_budget``. Probes between points of
            large height walk further, up to ``Settings.search_budget``.
    """
    budget = budget or SearchBudget(get_settings().isolation_probe_budget)
    sample = order.prefix(depth)
    if len(sample) < 2:
        return None
    ranked = sorted(sample, key=order.sort_key)
    rank = {x: i for i, x in enumerate(ranked)}

    for p in sample:
        i = rank[p]
        below = ranked[i - 1] if i > 0 else None
        above = ranked[i + 1] if i + 1 < len(ranked) else None
        if below is None and above is not None:
            if _looks_empty(order, None, p, budget) and _looks_empty(order, p, above, budget):
                return IsolationWitness(p, IsolationCase.LEFT_END, x0=above)
        elif above is None and below is not None:
            if _looks_empty(order, p, None, budget) and _looks_empty(order, below, p, budget):
                return IsolationWitness(p, IsolationCase.RIGHT_END, x0=below)
        elif below is not None and above is not None:
            if _looks_empty(order, below, p, budget) and _looks_empty(order, p, above, budget):
                return IsolationWitness(p, IsolationCase.INTERIOR, x0=below, x1=above)
    return None



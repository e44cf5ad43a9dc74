"""Construction of binary maps from ℕ, ℤ and ℚ into a countable order.

Each step doubles the domain, ``S_{n+1} = S_n ∪ (S_n + r_n)``, and extends the
current map ``f_n`` without changing it:

* :func:`extend_add_odd` interleaves the new images with the old ones and
  forces a chosen point ``x`` into the image. It needs
  ``ord2(a − b) < ord2(r)`` on distinct points of ``S`` and an order without
  isolated points.
* :func:`extend_add_outside` puts every new image above all old ones. It needs
  ``ord2(a − b) > ord2(r)`` on ``S`` and an order without a maximum.

:func:`construct_prefix` runs the schedule for a source: ℕ and ℤ use
``add_odd`` at every step with ``r_n = 2**n`` resp. ``(-2)**n``; ℚ alternates
``add_odd`` (even steps, ``r_n = q_{n/2}``) and ``add_outside`` (odd steps,
``r_n = 2**-((n+1)/2)``). The forced point is always ``g(k)`` for the smallest
``k`` with ``g(k)`` outside the current image, so ``g(0..k)`` is covered by
``f_k`` (ℕ, ℤ) resp. ``f_{2k+1}`` (ℚ).

Every point choice is the first enumerated point meeting the step's strict
bounds, so runs are deterministic.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from src.config import get_settings
from src.exceptions import (
    BudgetExceededError,
    ConstructionInvariantError,
    Ord2HypothesisError,
    OrderPropertyError,
    PreconditionError,
)
from src.services.dyadic_basis import (
    RSequence,
    build_q_sequence,
    find_close_pair,
    find_far_pair,
)
from src.services.order_oracle import (
    CountableOrder,
    SearchBudget,
    Source,
    find_point,
)
from src.services.rational_core import format_rational, ord2
from src.services.verifier import FiniteOrderedMap

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Extension lemmas
# ---------------------------------------------------------------------------


def _require_close_free(f: FiniteOrderedMap, r: Fraction) -> None:
    v = ord2(r)
    pair = find_close_pair(f.domain, int(v))
    if pair is not None:
        a, b = pair
        raise Ord2HypothesisError(
            f"ord2({format_rational(b)} - {format_rational(a)}) = {ord2(b - a)} "
            f"is not below ord2(r) = {v}",
            pair=pair,
            r=r,
        )


def _require_far_free(f: FiniteOrderedMap, r: Fraction) -> None:
    v = ord2(r)
    pair = find_far_pair(f.domain, int(v))
    if pair is not None:
        a, b = pair
        raise Ord2HypothesisError(
            f"ord2({format_rational(b)} - {format_rational(a)}) = {ord2(b - a)} "
            f"is not above ord2(r) = {v}",
            pair=pair,
            r=r,
        )


def extend_add_odd(
    f: FiniteOrderedMap,
    r: Fraction,
    x: Fraction,
    order: CountableOrder | None = None,
    budget: SearchBudget | None = None,
) -> FiniteOrderedMap:
    """Extend ``f`` to ``S ∪ (S + r)`` with ``x`` in the image.

    With ``a_1..a_m`` the domain in image order, ``f(a_i + r)`` is chosen
    strictly above ``f(a_{i-1})`` and ``f(a_{i-1} + r)``, strictly below
    ``f(a_{i+1})`` and different from ``f(a_i)``. ``x`` is used at the first
    ``i`` where it meets these bounds; otherwise the first enumerated point
    that does.

    Raises:
        Ord2HypothesisError: If two distinct points of ``S`` differ by ord2 >= ord2(r).
        PreconditionError: If ``x`` is already an image.
        BudgetExceededError: If some interval yields no point (suspected isolated point).
    """
    order = order or f.order
    r, x = Fraction(r), Fraction(x)
    if r == 0:
        raise PreconditionError("r must be nonzero")
    if len(f) == 0:
        raise PreconditionError("cannot extend the empty map")
    _require_close_free(f, r)
    if x in f.image:
        raise PreconditionError(f"target {format_rational(x)} is already an image")
    budget = budget or SearchBudget.default()

    seq = f.domain_in_image_order
    images = [f.image_of(a) for a in seq]
    precedes = order.precedes
    new: dict[Fraction, Fraction] = {}
    previous: Optional[Fraction] = None
    placed = False
    for i, a in enumerate(seq):
        lower = images[i - 1] if i > 0 else None
        if previous is not None and (lower is None or precedes(lower, previous)):
            lower = previous
        upper = images[i + 1] if i + 1 < len(seq) else None
        fits = (lower is None or precedes(lower, x)) and (upper is None or precedes(x, upper))
        if not placed and fits:
            chosen = x
            placed = True
        else:
            chosen = find_point(order, lower, upper, frozenset((images[i],)), budget)
        new[a + r] = chosen
        previous = chosen
    if not placed:
        logger.error("Target %s was never assignable for r=%s", format_rational(x), r)
        raise ConstructionInvariantError(
            f"target {format_rational(x)} fits no interval of the add_odd step with "
            f"r = {format_rational(r)}"
        )
    return f.extend(new)


def extend_add_outside(
    f: FiniteOrderedMap,
    r: Fraction,
    order: CountableOrder | None = None,
    budget: SearchBudget | None = None,
) -> FiniteOrderedMap:
    """Extend ``f`` to ``S ∪ (S + r)`` with every new image above all old ones.

    ``f(a_i + r)`` is the first enumerated point above ``f(a_m)`` and
    ``f(a_{i-1} + r)``, so the new images increase with ``i``.

    Raises:
        Ord2HypothesisError: If some ``a, b ∈ S`` differ by ord2 <= ord2(r).
        BudgetExceededError: If nothing lies above (suspected maximum).
    """
    order = order or f.order
    r = Fraction(r)
    if r == 0:
        raise PreconditionError("r must be nonzero")
    if len(f) == 0:
        raise PreconditionError("cannot extend the empty map")
    _require_far_free(f, r)
    budget = budget or SearchBudget.default()

    seq = f.domain_in_image_order
    lower = f.image_of(seq[-1])
    new: dict[Fraction, Fraction] = {}
    for a in seq:
        lower = find_point(order, lower, None, frozenset(), budget)
        new[a + r] = lower
    return f.extend(new)


# ---------------------------------------------------------------------------
# Prefix construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    """Audit entry for one extension step.

    Attributes:
        step: ``n`` in ``f_n → f_{n+1}``.
        lemma: ``"add_odd"`` or ``"add_outside"``.
        r: The shift ``r_n``.
        target: Forced point ``g(k)`` (add_odd only).
        target_index: ``k``.
        target_preimage: Domain element that received ``g(k)``.
        new_entries: ``(a + r, image)`` pairs added, ascending by image.
        enumeration_indices: Enumeration index of each new image.
        coverage_cursor: Smallest ``k`` with ``g(k)`` outside the new image.
    """

    step: int
    lemma: str
    r: Fraction
    target: Optional[Fraction]
    target_index: Optional[int]
    target_preimage: Optional[Fraction]
    new_entries: tuple[tuple[Fraction, Fraction], ...]
    enumeration_indices: tuple[Optional[int], ...]
    coverage_cursor: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "lemma": self.lemma,
            "r": format_rational(self.r),
            "target": None if self.target is None else format_rational(self.target),
            "target_index": self.target_index,
            "target_preimage": (
                None if self.target_preimage is None else format_rational(self.target_preimage)
            ),
            "new_entries": [
                [format_rational(a), format_rational(x)] for a, x in self.new_entries
            ],
            "enumeration_indices": list(self.enumeration_indices),
            "coverage_cursor": self.coverage_cursor,
        }


@dataclass(frozen=True)
class ConstructionState:
    """Snapshot of a (possibly partial) construction.

    ``maps[n]`` is ``f_n`` sorted under ``order``; ``depth`` is the index of
    the last map. ``reversed_run`` records that the steps ran against the
    reversed order.
    """

    source: Source
    order: CountableOrder
    depth: int
    maps: tuple[FiniteOrderedMap, ...]
    generators: RSequence
    budget: SearchBudget
    steps: tuple[StepRecord, ...] = ()
    reversed_run: bool = False
    elapsed_seconds: float = field(default=0.0, compare=False)

    @property
    def final_map(self) -> FiniteOrderedMap:
        return self.maps[-1]

    @property
    def coverage_cursor(self) -> int:
        """Smallest ``k`` with ``g(k)`` outside the image of the final map."""
        return coverage_cursor(self.order, self.final_map.image)


def coverage_cursor(order: CountableOrder, image: frozenset[Fraction], start: int = 0) -> int:
    k = start
    while order.point(k) in image:
        k += 1
    return k


def _generators(source: Source, depth: int, cap: int | None) -> RSequence:
    if source is Source.N:
        return RSequence.natural(depth)
    if source is Source.Z:
        return RSequence.integer(depth)
    return RSequence.from_q_sequence(build_q_sequence((depth + 1) // 2, cap=cap), depth)


def _check_source(
    source: Source, order: CountableOrder, depth: int, check_declared: bool
) -> bool:
    """Validate the request; return ``True`` when the run must use the reversed order."""
    settings = get_settings()
    limit = settings.max_depth_q if source is Source.Q else settings.max_depth_nz
    if not 0 <= depth <= limit:
        raise PreconditionError(
            f"depth {depth} outside [0, {limit}] for source {source.value}"
        )
    props = order.properties
    if not check_declared:
        return False
    if props.has_isolated_points:
        raise OrderPropertyError(
            f"{order.name} is declared with isolated points; no binary bijection "
            f"from {source.value} exists",
            order_name=order.name,
        )
    if source is Source.Q:
        if props.has_maximum and props.has_minimum:
            raise OrderPropertyError(
                f"{order.name} is declared with both a maximum and a minimum; "
                "no binary bijection from Q exists",
                order_name=order.name,
            )
        return props.has_maximum
    return False


def construct_prefix(
    source: Source | str,
    order: CountableOrder,
    depth: int,
    budget: SearchBudget | None = None,
    check_declared: bool = True,
    q_cap: int | None = None,
) -> ConstructionState:
    """Build ``f_0 ⊂ f_1 ⊂ ... ⊂ f_depth`` for ``source`` into ``order``.

    Args:
        source: ℕ, ℤ or ℚ.
        order: Target order.
        depth: Number of extension steps; the final domain has ``2**depth`` points.
        budget: Budget of each point search.
        check_declared: Refuse orders whose declared properties rule out the
            construction. Negative runs switch this off to watch the failure.
        q_cap: Candidate cap of the q-sequence search (source ℚ).

    Raises:
        PreconditionError: On a depth outside the configured limits.
        OrderPropertyError: If the declared properties forbid the construction.
        BudgetExceededError: With ``step`` and ``partial_state`` filled in.
    """
    source = Source(source)
    budget = budget or SearchBudget.default()
    use_reversed = _check_source(source, order, depth, check_declared)
    working = order.reversed() if use_reversed else order
    generators = _generators(source, depth, q_cap)

    start = time.monotonic()
    logger.info(
        "Starting construction source=%s order=%s depth=%d%s",
        source.value,
        order.name,
        depth,
        " (reversed)" if use_reversed else "",
    )
    f = FiniteOrderedMap({Fraction(0): working.point(0)}, working)
    maps: list[FiniteOrderedMap] = [f]
    steps: list[StepRecord] = []
    cursor = coverage_cursor(working, f.image)

    def snapshot(elapsed: float) -> ConstructionState:
        ordered = tuple(m.with_order(order) for m in maps) if use_reversed else tuple(maps)
        return ConstructionState(
            source=source,
            order=order,
            depth=len(maps) - 1,
            maps=ordered,
            generators=generators,
            budget=budget,
            steps=tuple(steps),
            reversed_run=use_reversed,
            elapsed_seconds=elapsed,
        )

    for n in range(depth):
        r = generators[n]
        forcing = source is not Source.Q or n % 2 == 0
        target: Optional[Fraction] = working.point(cursor) if forcing else None
        try:
            if forcing:
                nxt = extend_add_odd(f, r, target, working, budget)  # type: ignore[arg-type]
            else:
                nxt = extend_add_outside(f, r, working, budget)
        except BudgetExceededError as exc:
            exc.step = n
            exc.partial_state = snapshot(time.monotonic() - start)
            logger.warning(
                "Construction blocked at step %d: no point in (%s, %s) within %d steps",
                n,
                "-" if exc.lower is None else format_rational(exc.lower),
                "-" if exc.upper is None else format_rational(exc.upper),
                exc.steps,
            )
            raise
        added = tuple((a + r, nxt.image_of(a + r)) for a in f.domain_in_image_order)
        added = tuple(sorted(added, key=lambda entry: working.sort_key(entry[1])))
        preimage = next((a for a, x in added if x == target), None)
        target_index = cursor if forcing else None
        cursor = coverage_cursor(working, nxt.image, cursor)
        steps.append(StepRecord(
            step=n,
            lemma="add_odd" if forcing else "add_outside",
            r=r,
            target=target,
            target_index=target_index,
            target_preimage=preimage,
            new_entries=added,
            enumeration_indices=tuple(
                working.index_of(x, budget.max_enumeration_index) for _, x in added
            ),
            coverage_cursor=cursor,
        ))
        logger.info(
            "Step %d: %s r=%s target=%s size=%d cursor=%d",
            n,
            steps[-1].lemma,
            format_rational(r),
            "-" if target is None else format_rational(target),
            len(nxt),
            cursor,
        )
        f = nxt
        maps.append(f)

    elapsed = time.monotonic() - start
    logger.info(
        "Construction finished in %.2f seconds: %d points, coverage cursor %d",
        elapsed,
        len(f),
        cursor,
    )
    return snapshot(elapsed)

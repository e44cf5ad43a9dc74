"""Unit tests for countable orders, enumerations and searches (src/services/order_oracle.py)."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from src.exceptions import BudgetExceededError, PreconditionError, UnknownOrderError
from src.schemas.order import OrderDescription
from src.services.order_oracle import (
    BuiltinOrder,
    Carrier,
    Comparison,
    CountableOrder,
    Interval,
    IsolationCase,
    OrderProperties,
    Piece,
    SearchBudget,
    Source,
    admissible_sources,
    builtin_order,
    compile_description,
    find_point,
    find_strictly_above,
    find_strictly_below,
    find_strictly_between,
    integer_enumeration,
    order_axiom_problems,
    rational_enumeration,
    search_isolated_point,
)
from src.services.rational_core import parse_rational

PROBE = SearchBudget(2_000)


def _rationals(*texts: str) -> list[Fraction]:
    return [parse_rational(t) for t in texts]


def _description(comparator: dict, **declared: bool) -> OrderDescription:
    flags = {"has_isolated_points": False, "has_maximum": False, "has_minimum": False}
    flags.update(declared)
    return OrderDescription.model_validate(
        {"name": "custom", "comparator": comparator, "declared": flags}
    )


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


def test_rational_enumeration_prefix():
    """ℚ is listed by |p| + q, ties by ascending p, 0 first."""
    expected = _rationals(
        "0", "-1", "1", "-2", "-1/2", "1/2", "2", "-3", "-1/3", "1/3", "3",
        "-4", "-3/2", "-2/3", "-1/4", "1/4", "2/3", "3/2", "4",
    )
    got = list(itertools.islice(rational_enumeration(), len(expected)))
    assert got == expected, f"enumeration prefix mismatch: {got}"


def test_odd_denominator_enumeration_prefix():
    """Z_(2) keeps the order of ℚ and drops even denominators."""
    expected = _rationals(
        "0", "-1", "1", "-2", "2", "-3", "-1/3", "1/3", "3", "-4", "-2/3", "2/3", "4", "-5", "-1/5"
    )
    got = list(itertools.islice(rational_enumeration(odd_denominators_only=True), len(expected)))
    assert got == expected


def test_rational_enumeration_has_no_repeats():
    sample = list(itertools.islice(rational_enumeration(), 5_000))
    assert len(set(sample)) == len(sample)


def test_integer_enumeration_prefix():
    assert list(itertools.islice(integer_enumeration(), 7)) == _rationals(
        "0", "-1", "1", "-2", "2", "-3", "3"
    )


@pytest.mark.parametrize(
    "kind, expected",
    [
        (BuiltinOrder.Q_STANDARD, ["0", "-1", "1", "-2", "-1/2", "1/2", "2"]),
        (BuiltinOrder.Q_UNIT_CLOSED, ["0", "1", "1/2", "1/3", "1/4", "2/3"]),
        (BuiltinOrder.Q_UNIT_HALF_OPEN, ["0", "1/2", "1/3", "1/4", "2/3"]),
        (BuiltinOrder.Z_STANDARD, ["0", "-1", "1", "-2", "2"]),
        (BuiltinOrder.Q_PLUS_ISOLATED, ["0", "1", "1/2", "2", "1/3", "1/4", "2/3"]),
    ],
)
def test_builtin_enumeration_prefixes(kind, expected):
    """Restricted orders filter the canonical enumeration of ℚ."""
    order = builtin_order(kind)
    assert order.prefix(len(expected)) == _rationals(*expected)


def test_index_of_and_point_agree(q_standard):
    for k in range(40):
        assert q_standard.index_of(q_standard.point(k)) == k
    assert q_standard.index_of(Fraction(-1, 2)) == 4


def test_index_of_outside_the_order_is_none(unit_closed):
    assert unit_closed.index_of(Fraction(2)) is None


# ---------------------------------------------------------------------------
# Comparators
# ---------------------------------------------------------------------------


def test_standard_comparison(q_standard):
    assert q_standard.compare(Fraction(1), Fraction(2)) is Comparison.LESS
    assert q_standard.compare(Fraction(2), Fraction(1)) is Comparison.GREATER
    assert q_standard.compare(Fraction(2), Fraction(2)) is Comparison.EQUAL


def test_reversed_order_flips_comparator_and_swaps_extremes(unit_half_open):
    """[0, 1) has a minimum; its reverse has a maximum and the same enumeration."""
    reverse = unit_half_open.reversed()
    assert reverse.name == "q-unit-half-open~reversed"
    assert reverse.precedes(Fraction(1, 2), Fraction(0))
    assert reverse.properties.has_maximum and not reverse.properties.has_minimum
    assert reverse.prefix(5) == unit_half_open.prefix(5)
    assert reverse.greatest([Fraction(0), Fraction(1, 2)]) == 0
    assert reverse.least([Fraction(0), Fraction(1, 2)]) == Fraction(1, 2)


def test_builtin_order_accepts_value_and_enum_name():
    assert builtin_order("z-standard") is builtin_order("Z_STANDARD")
    assert builtin_order(BuiltinOrder.Z_STANDARD).name == "z-standard"


def test_unknown_builtin_raises():
    with pytest.raises(UnknownOrderError) as exc_info:
        builtin_order("no-such-order")
    assert exc_info.value.name == "no-such-order"


# ---------------------------------------------------------------------------
# Compiling descriptions
# ---------------------------------------------------------------------------


def test_interval_contains_respects_open_ends():
    interval = Interval(Fraction(0), Fraction(1), lower_closed=True, upper_closed=False)
    assert interval.contains(Fraction(0))
    assert not interval.contains(Fraction(1))
    assert interval.describe() == "[0, 1)"
    assert Interval().describe() == "(-inf, +inf)"


def test_bounded_integer_piece_is_finite():
    assert not Piece(Carrier.INTEGERS, Interval(Fraction(0), Fraction(5))).is_infinite()
    assert Piece(Carrier.RATIONALS, Interval(Fraction(0), Fraction(5))).is_infinite()


def test_reversed_interval_description_compiles():
    order = compile_description(
        _description(
            {
                "kind": "reversed",
                "of": {"kind": "interval", "of": {"kind": "standard"}, "lower": "0",
                       "upper": "1", "lower_closed": False},
            },
            has_minimum=True,
        )
    )
    assert order.descending
    assert order.contains(Fraction(1)) and not order.contains(Fraction(0))
    assert order.precedes(Fraction(1), Fraction(1, 2))


def test_union_with_mixed_directions_is_rejected():
    standard = {"kind": "interval", "of": {"kind": "standard"}, "upper": "0"}
    with pytest.raises(PreconditionError):
        compile_description(
            _description({"kind": "union", "of": [standard, {"kind": "reversed", "of": standard}]})
        )


def test_finite_description_is_rejected():
    """A bounded integer interval has no infinite piece."""
    with pytest.raises(PreconditionError):
        compile_description(
            _description(
                {"kind": "interval", "of": {"kind": "standard", "carrier": "integers"},
                 "lower": "0", "upper": "5"},
                has_isolated_points=True, has_maximum=True, has_minimum=True,
            )
        )


@pytest.mark.parametrize("kind", list(BuiltinOrder))
def test_builtin_orders_pass_axiom_checks(kind):
    """Trichotomy and transitivity on the first 200 points, no repeats in the first 1000."""
    order = builtin_order(kind)
    problems = order_axiom_problems(order, 200)
    assert problems == [], f"{kind.value}: {problems}"
    assert len(set(order.prefix(1_000))) == 1_000, f"{kind.value} repeats a point"


@pytest.mark.parametrize(
    "kind, expected",
    [
        (BuiltinOrder.Q_STANDARD, {Source.N, Source.Z, Source.Q}),
        (BuiltinOrder.Q_UNIT_CLOSED, {Source.N, Source.Z}),
        (BuiltinOrder.Q_UNIT_HALF_OPEN, {Source.N, Source.Z, Source.Q}),
        (BuiltinOrder.Z_STANDARD, set()),
        (BuiltinOrder.Q_PLUS_ISOLATED, set()),
    ],
)
def test_admissible_sources(kind, expected):
    """No isolated points admits ℕ and ℤ; ℚ also needs a missing maximum or minimum."""
    assert admissible_sources(builtin_order(kind)) == expected


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------


def test_find_point_returns_first_enumerated_candidate(q_standard):
    assert find_strictly_between(q_standard, Fraction(0), Fraction(1)) == Fraction(1, 2)
    assert find_strictly_between(
        q_standard, Fraction(0), Fraction(1), exclude={Fraction(1, 2)}
    ) == Fraction(1, 3)
    assert find_strictly_above(q_standard, Fraction(2)) == Fraction(3)
    assert find_strictly_below(q_standard, Fraction(0)) == Fraction(-1)


@pytest.mark.parametrize(
    "order",
    [
        builtin_order(BuiltinOrder.Q_STANDARD),
        builtin_order(BuiltinOrder.Q_UNIT_HALF_OPEN),
        builtin_order(BuiltinOrder.Q_UNIT_HALF_OPEN).reversed(),
    ],
    ids=["q-standard", "q-unit-half-open", "reversed-half-open"],
)
def test_find_strictly_between_returns_least_enumeration_index(order):
    """Every ordered pair of the first 20 points, checked against a plain walk."""
    walk = order.prefix(2_000)
    budget = SearchBudget(2_000)
    for x, y in itertools.combinations(walk[:20], 2):
        lower, upper = (x, y) if order.precedes(x, y) else (y, x)
        inside = [z for z in walk if order.precedes(lower, z) and order.precedes(z, upper)]
        first = find_strictly_between(order, lower, upper, budget=budget)
        assert first == inside[0], f"({lower}, {upper}) gave {first}"
        second = find_strictly_between(order, lower, upper, exclude={first}, budget=budget)
        assert second == inside[1], f"({lower}, {upper}) excluding {first} gave {second}"


def test_find_strictly_between_requires_ordered_bounds(q_standard):
    with pytest.raises(PreconditionError):
        find_strictly_between(q_standard, Fraction(1), Fraction(0))


def test_gap_between_integers_exhausts_budget(z_standard):
    """Adjacent integers bound an empty interval, so the search walks its whole budget."""
    with pytest.raises(BudgetExceededError) as exc_info:
        find_point(z_standard, Fraction(0), Fraction(1), budget=SearchBudget(500))
    exc = exc_info.value
    assert (exc.lower, exc.upper, exc.steps) == (0, 1, 500)
    assert exc.step is None


def test_nothing_above_a_maximum(unit_closed):
    with pytest.raises(BudgetExceededError) as exc_info:
        find_strictly_above(unit_closed, Fraction(1), budget=SearchBudget(500))
    assert exc_info.value.upper is None


def test_search_budget_must_be_positive():
    with pytest.raises(PreconditionError):
        SearchBudget(0)


def test_isolated_point_in_the_integers(z_standard):
    witness = search_isolated_point(z_standard, 10, PROBE)
    assert witness is not None
    assert (witness.point, witness.case, witness.x0, witness.x1) == (
        0, IsolationCase.INTERIOR, -1, 1
    )


def test_isolated_maximum_of_unit_plus_two(q_plus_isolated):
    """2 has nothing above it and nothing between it and 1."""
    witness = search_isolated_point(q_plus_isolated, 4, PROBE)
    assert witness is not None
    assert witness.point == 2
    assert witness.case is IsolationCase.RIGHT_END
    assert witness.x0 == 1 and witness.x1 is None


@pytest.mark.parametrize("kind", [BuiltinOrder.Q_STANDARD, BuiltinOrder.Q_UNIT_CLOSED])
def test_dense_orders_show_no_isolated_point(kind):
    assert search_isolated_point(builtin_order(kind), 16, PROBE) is None


def test_isolation_probe_needs_two_points(q_standard):
    assert search_isolated_point(q_standard, 1, PROBE) is None


def test_dense_order_shows_no_isolated_point_in_a_large_sample(q_standard):
    """Neighbours in a 3000-point sample sit close together; every gap still has a point."""
    assert search_isolated_point(q_standard, 3_000) is None


def test_isolation_search_scales_past_a_tiny_budget(q_standard, unit_closed):
    assert search_isolated_point(q_standard, 500, SearchBudget(1)) is None
    assert search_isolated_point(unit_closed, 500, SearchBudget(1)) is None


# ---------------------------------------------------------------------------
# Enumeration cache
# ---------------------------------------------------------------------------


def _integers(cache_limit: int | None) -> CountableOrder:
    return CountableOrder(
        "integers",
        (Piece(carrier=Carrier.INTEGERS),),
        OrderProperties(has_isolated_points=True, has_maximum=False, has_minimum=False),
        cache_limit=cache_limit,
    )


def test_long_walks_do_not_grow_the_cache():
    order = _integers(50)

    with pytest.raises(BudgetExceededError):
        find_point(order, Fraction(0), Fraction(1), budget=SearchBudget(2_000))

    assert order.cached_points == 50


def test_points_past_the_cache_match_the_enumeration():
    order = _integers(50)
    expected = list(itertools.islice(integer_enumeration(), 200))

    assert order.point(120) == expected[120] == 60
    assert order.prefix(200) == expected
    assert list(order.walk(60, start=45)) == expected[45:60]
    assert order.index_of(Fraction(-70), limit=200) == 139
    assert order.cached_points == 50


def test_reversed_order_keeps_the_cache_limit():
    assert _integers(50).reversed().cache_limit == 50


def test_cache_limit_defaults_to_settings(settings_env):
    settings_env.setenv("ENUMERATION_CACHE_LIMIT", "64")

    assert _integers(None).cache_limit == 64

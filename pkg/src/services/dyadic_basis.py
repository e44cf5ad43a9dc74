"""2-adic generators: q-sequences, r-sequences, subset sums and decompositions.

A *q-sequence* ``q_0, q_1, ...`` in Z_(2) has ``ord2(q_n) = n``; every element of
Z_(2) is then a finite subset sum of it. The greedy construction scans an
enumeration ``h`` of Z_(2) and takes for ``q_n`` the residue of the first
candidate whose residue against ``q_0..q_{n-1}`` has ord2 exactly ``n``.

The *r-sequence* interleaves the q-sequence with negative powers of two::

    r_n = q_{n/2}          (n even)
    r_n = 2 ** -((n+1)/2)  (n odd)

so that its subset sums exhaust ℚ. The integer sources use ``r_n = 2**n``
(for ℕ) and ``r_n = (-2)**n`` (for ℤ).

Usage::

    qs = build_q_sequence(7)
    rs = build_r_sequence(qs, 14)
    decomposition = decompose(Fraction(7, 12), rs)
"""

from __future__ import annotations

import logging
from collections.abc import Collection, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from src.config import get_settings
from src.exceptions import BasisPreconditionError, PreconditionError, QSequenceCapError
from src.services.order_oracle import rational_enumeration
from src.services.rational_core import (
    dyadic_exponent,
    format_rational,
    in_z2,
    ord2,
    power_of_two,
    residue_mod_power_of_two,
)

logger = logging.getLogger(__name__)

Pair = tuple[Fraction, Fraction]


# ---------------------------------------------------------------------------
# Pairwise ord2 bounds
# ---------------------------------------------------------------------------


def _scaled_residues(points: list[Fraction], k: int) -> tuple[list[int], int]:
    exponent = max((dyadic_exponent(a) for a in points), default=0)
    modulus_exponent = k + exponent
    if modulus_exponent <= 0:
        return [0] * len(points), modulus_exponent
    scale = power_of_two(exponent)
    return (
        [residue_mod_power_of_two(a * scale, modulus_exponent) for a in points],
        modulus_exponent,
    )


def find_close_pair(points: Iterable[Fraction], v: int) -> Optional[Pair]:
    """Return distinct ``a < b`` with ``ord2(a − b) >= v``, or ``None``.

    Linear in the number of points: two points qualify exactly when they share
    a residue modulo ``2**v`` after clearing dyadic denominators.
    """
    ordered = sorted(set(Fraction(a) for a in points))
    if len(ordered) < 2:
        return None
    residues, _ = _scaled_residues(ordered, v)
    first_with: dict[int, Fraction] = {}
    for a, residue in zip(ordered, residues):
        if residue in first_with:
            return first_with[residue], a
        first_with[residue] = a
    return None


def find_far_pair(points: Iterable[Fraction], v: int) -> Optional[Pair]:
    """Return distinct ``a < b`` with ``ord2(a − b) <= v``, or ``None``."""
    ordered = sorted(set(Fraction(a) for a in points))
    if len(ordered) < 2:
        return None
    residues, _ = _scaled_residues(ordered, v + 1)
    for a, residue in zip(ordered[1:], residues[1:]):
        if residue != residues[0]:
            return ordered[0], a
    return None


# ---------------------------------------------------------------------------
# Binary representation over a q-prefix
# ---------------------------------------------------------------------------


def _check_q_profile(qs: Collection[Fraction]) -> None:
    for i, q in enumerate(qs):
        if ord2(q) != i:
            raise BasisPreconditionError(
                f"q_{i} = {format_rational(q)} has ord2 {ord2(q)}, expected {i}"
            )


def _reduce(q: Fraction, qs: list[Fraction] | tuple[Fraction, ...]) -> tuple[Fraction, list[int]]:
    residue = q
    subset: list[int] = []
    for i, q_i in enumerate(qs):
        if ord2(residue) == i:
            residue -= q_i
            subset.append(i)
    return residue, subset


def binary_representation(q: Fraction, qs: Collection[Fraction]) -> frozenset[int]:
    """Return the unique ``A ⊆ {0..n-1}`` with ``ord2(q − Σ_{i∈A} q_i) >= n``.

    Digit ``i`` is adjoined exactly when the running residue has ord2 ``i``.

    Raises:
        BasisPreconditionError: If ``ord2(q) < 0`` or some ``ord2(q_i) != i``.
    """
    q = Fraction(q)
    if not in_z2(q):
        raise BasisPreconditionError(f"{format_rational(q)} is not in Z_(2)")
    _check_q_profile(qs)
    _, subset = _reduce(q, tuple(qs))
    return frozenset(subset)


def exact_representation(q: Fraction, qs: Collection[Fraction]) -> Optional[frozenset[int]]:
    """Return ``A`` with ``q = Σ_{i∈A} q_i`` exactly, or ``None`` if the prefix is too short."""
    subset = binary_representation(q, qs)
    terms = tuple(qs)
    if Fraction(q) - sum((terms[i] for i in subset), Fraction(0)) == 0:
        return subset
    return None


# ---------------------------------------------------------------------------
# q-sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QSequence:
    """Prefix ``q_0..q_{n-1}`` of a q-sequence.

    Attributes:
        terms: The generators; ``ord2(terms[i]) == i``.
        source_indices: ``l_i``, the index in ``h`` each term was taken from.
        subsets: ``A_i`` with ``terms[i] = h(l_i) − Σ_{j∈A_i} q_j``.
    """

    terms: tuple[Fraction, ...]
    source_indices: tuple[int, ...] = ()
    subsets: tuple[frozenset[int], ...] = ()

    def __post_init__(self) -> None:
        _check_q_profile(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, index: int) -> Fraction:
        return self.terms[index]

    def prefix(self, count: int) -> QSequence:
        return QSequence(
            self.terms[:count], self.source_indices[:count], self.subsets[:count]
        )


class QSequenceBuilder:
    """Greedy q-sequence construction that can be resumed term by term.

    Args:
        h: Enumeration of Z_(2) to scan; defaults to the canonical one
            (odd-denominator fractions by ``|p| + q``, then ``p``, 0 first).
        cap: Candidates scanned per term before :class:`QSequenceCapError`;
            defaults to ``Settings.q_sequence_cap``.
    """

    def __init__(self, h: Iterable[Fraction] | None = None, cap: int | None = None) -> None:
        self._source: Iterator[Fraction] = (
            iter(h) if h is not None else rational_enumeration(odd_denominators_only=True)
        )
        self.cap = cap or get_settings().q_sequence_cap
        self._residues: list[Fraction] = []
        self._subsets: list[list[int]] = []
        self._terms: list[Fraction] = []
        self._source_indices: list[int] = []
        self._term_subsets: list[frozenset[int]] = []

    def _candidate_residue(self, index: int) -> Fraction:
        while len(self._residues) <= index:
            try:
                value = Fraction(next(self._source))
            except StopIteration:
                raise BasisPreconditionError(
                    f"enumeration h ended after {len(self._residues)} values"
                ) from None
            if not in_z2(value):
                raise BasisPreconditionError(
                    f"h({len(self._residues)}) = {format_rational(value)} is not in Z_(2)"
                )
            residue, subset = _reduce(value, self._terms)
            self._residues.append(residue)
            self._subsets.append(subset)
        return self._residues[index]

    def next_term(self) -> Fraction:
        """Find ``q_n`` for the current length ``n`` and append it."""
        n = len(self._terms)
        for index in range(self.cap):
            if ord2(self._candidate_residue(index)) == n:
                break
        else:
            logger.warning("No candidate for q_%d among %d values of h", n, self.cap)
            raise QSequenceCapError(
                f"No q_{n} found among the first {self.cap} values of h", index=n, cap=self.cap
            )
        q_n = self._residues[index]
        self._terms.append(q_n)
        self._source_indices.append(index)
        self._term_subsets.append(frozenset(self._subsets[index]))
        for position, residue in enumerate(self._residues):
            if ord2(residue) == n:
                self._residues[position] = residue - q_n
                self._subsets[position].append(n)
        logger.info("q_%d = %s (l_%d = %d)", n, format_rational(q_n), n, index)
        return q_n

    def build(self, count: int) -> QSequence:
        """Return the first ``count`` terms, computing any that are missing."""
        while len(self._terms) < count:
            self.next_term()
        return QSequence(
            tuple(self._terms[:count]),
            tuple(self._source_indices[:count]),
            tuple(self._term_subsets[:count]),
        )


def build_q_sequence(
    count: int, h: Iterable[Fraction] | None = None, cap: int | None = None
) -> QSequence:
    """Return the first ``count`` terms of the greedy q-sequence for ``h``.

    Raises:
        QSequenceCapError: If a term needs more than ``cap`` candidates.
    """
    if count < 0:
        raise PreconditionError(f"count must be non-negative, got {count}")
    return QSequenceBuilder(h, cap).build(count)


# ---------------------------------------------------------------------------
# r-sequences and subset sums
# ---------------------------------------------------------------------------


class RSequenceKind(str, Enum):
    NATURAL = "natural"  # 2**n, subset sums exhaust ℕ
    INTEGER = "integer"  # (-2)**n, subset sums exhaust ℤ
    RATIONAL = "rational"  # interleaved with a q-sequence, subset sums exhaust ℚ


@dataclass(frozen=True)
class SubsetSumSet:
    """``S_n``: every subset sum of the generators, tagged by its subset."""

    generators: tuple[Fraction, ...]
    elements: Mapping[Fraction, frozenset[int]] = field(default_factory=dict)

    @classmethod
    def from_generators(cls, generators: Iterable[Fraction]) -> SubsetSumSet:
        """Enumerate all subset sums.

        Raises:
            BasisPreconditionError: If two subsets have the same sum.
        """
        gens = tuple(Fraction(r) for r in generators)
        elements: dict[Fraction, frozenset[int]] = {Fraction(0): frozenset()}
        for i, r in enumerate(gens):
            shifted = {s + r: subset | {i} for s, subset in elements.items()}
            clash = shifted.keys() & elements.keys()
            if clash:
                value = min(clash)
                raise BasisPreconditionError(
                    f"subset sums collide at {format_rational(value)} after adding r_{i}"
                )
            elements.update(shifted)
        return cls(gens, elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, value: object) -> bool:
        return value in self.elements

    def subset_of(self, value: Fraction) -> frozenset[int]:
        return self.elements[value]

    def sorted_elements(self) -> list[Fraction]:
        return sorted(self.elements)


@dataclass(frozen=True)
class RSequence:
    """Prefix ``r_0..r_{n-1}`` of a generator sequence."""

    terms: tuple[Fraction, ...]
    kind: RSequenceKind = RSequenceKind.RATIONAL

    def __post_init__(self) -> None:
        if any(r == 0 for r in self.terms):
            raise BasisPreconditionError("r-sequence terms must be nonzero")

    @classmethod
    def natural(cls, count: int) -> RSequence:
        return cls(tuple(Fraction(1 << n) for n in range(count)), RSequenceKind.NATURAL)

    @classmethod
    def integer(cls, count: int) -> RSequence:
        return cls(tuple(Fraction((-2) ** n) for n in range(count)), RSequenceKind.INTEGER)

    @classmethod
    def from_q_sequence(cls, qs: QSequence, count: int) -> RSequence:
        """Interleave ``qs`` with ``2**-1, 2**-2, ...``.

        Raises:
            PreconditionError: If ``count > 2 * len(qs)``.
        """
        if count > 2 * len(qs):
            raise PreconditionError(
                f"r-sequence of length {count} needs {(count + 1) // 2} q-terms, got {len(qs)}"
            )
        terms = tuple(
            qs[n // 2] if n % 2 == 0 else power_of_two(-(n + 1) // 2) for n in range(count)
        )
        return cls(terms, RSequenceKind.RATIONAL)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, index: int) -> Fraction:
        return self.terms[index]

    @property
    def q_terms(self) -> tuple[Fraction, ...]:
        """The q-sequence terms at even positions."""
        return self.terms[0::2]

    def subset_sums(self, count: int | None = None) -> SubsetSumSet:
        """``S_count`` (all of the prefix when ``count`` is ``None``)."""
        count = len(self.terms) if count is None else count
        return SubsetSumSet.from_generators(self.terms[:count])


def build_r_sequence(qs: QSequence, count: int) -> RSequence:
    return RSequence.from_q_sequence(qs, count)


def r_sequence_problems(rs: RSequence, upto: int | None = None) -> list[str]:
    """Check the ord2 separation each step of the ℚ construction relies on.

    For even ``n`` all distinct ``a, b ∈ S_n`` need ``ord2(a − b) < ord2(r_n)``;
    for odd ``n`` they need ``ord2(a − b) > ord2(r_n)``.
    """
    upto = len(rs) - 1 if upto is None else min(upto, len(rs) - 1)
    problems: list[str] = []
    for n in range(upto + 1):
        points = rs.subset_sums(n).elements.keys()
        v = int(ord2(rs[n]))
        pair = find_close_pair(points, v) if n % 2 == 0 else find_far_pair(points, v)
        if pair is not None:
            a, b = pair
            problems.append(
                f"S_{n}: ord2({format_rational(b)} - {format_rational(a)}) = "
                f"{ord2(b - a)} against ord2(r_{n}) = {v}"
            )
    return problems


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------


class DecompositionStatus(str, Enum):
    OK = "ok"
    NEED_LONGER_PREFIX = "need-longer-prefix"


@dataclass(frozen=True)
class Decomposition:
    """``value = Σ_{i∈indices} r_i`` when ``status`` is OK.

    Attributes:
        value: The decomposed rational.
        status: OK or NEED_LONGER_PREFIX.
        indices: r-sequence indices (odd ones are the dyadic part).
        dyadic_exponents: ``j`` for each ``2**-j`` split off.
        z2_part: What remains in Z_(2) after the dyadic part.
    """

    value: Fraction
    status: DecompositionStatus
    indices: frozenset[int] = frozenset()
    dyadic_exponents: tuple[int, ...] = ()
    z2_part: Fraction = Fraction(0)

    @property
    def is_complete(self) -> bool:
        return self.status is DecompositionStatus.OK

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": format_rational(self.value),
            "status": self.status.value,
            "indices": sorted(self.indices),
            "dyadic_exponents": list(self.dyadic_exponents),
            "z2_part": format_rational(self.z2_part),
        }


def split_dyadic_part(r: Fraction) -> tuple[tuple[int, ...], Fraction]:
    """Split ``r = q + Σ_{j∈B} 2**-j`` with ``q`` in Z_(2).

    Subtracts ``2**ord2(residue)`` while the residue has negative ord2; each
    step strictly raises ord2, so this takes at most ``-ord2(r)`` steps.
    """
    residue = Fraction(r)
    exponents: list[int] = []
    while residue != 0 and ord2(residue) < 0:
        e = int(ord2(residue))
        residue -= power_of_two(e)
        exponents.append(-e)
    return tuple(exponents), residue


def decompose(r: Fraction, rs: RSequence) -> Decomposition:
    """Return ``A`` with ``r = Σ_{i∈A} r_i`` or report that ``rs`` is too short.

    Raises:
        PreconditionError: If ``rs`` is not built from a q-sequence.
    """
    if rs.kind is not RSequenceKind.RATIONAL:
        raise PreconditionError(f"decompose needs a rational r-sequence, got {rs.kind.value}")
    r = Fraction(r)
    exponents, z2_part = split_dyadic_part(r)
    need_longer = Decomposition(
        r, DecompositionStatus.NEED_LONGER_PREFIX, dyadic_exponents=exponents, z2_part=z2_part
    )
    dyadic_indices = {2 * j - 1 for j in exponents}
    if any(index >= len(rs) for index in dyadic_indices):
        return need_longer
    q_indices: frozenset[int] = frozenset()
    if z2_part != 0:
        subset = exact_representation(z2_part, rs.q_terms)
        if subset is None:
            return need_longer
        q_indices = frozenset(2 * i for i in subset)
    return Decomposition(
        r,
        DecompositionStatus.OK,
        frozenset(dyadic_indices) | q_indices,
        exponents,
        z2_part,
    )


def decompose_extending(
    r: Fraction,
    max_length: int,
    h: Iterable[Fraction] | None = None,
    cap: int | None = None,
) -> tuple[Decomposition, RSequence]:
    """Grow the r-sequence one term at a time until ``decompose`` succeeds.

    Returns the last attempt (NEED_LONGER_PREFIX once ``max_length`` terms did
    not suffice) and the sequence it used.
    """
    builder = QSequenceBuilder(h, cap)
    length = 1
    while True:
        rs = RSequence.from_q_sequence(builder.build((length + 1) // 2), length)
        result = decompose(r, rs)
        if result.is_complete or length >= max_length:
            logger.info(
                "decompose(%s) with %d terms: %s", format_rational(r), length, result.status.value
            )
            return result, rs
        length += 1


# ---------------------------------------------------------------------------
# Shift lemma
# ---------------------------------------------------------------------------


class ShiftCase(str, Enum):
    """Hypotheses on ``ord2(a − b)`` for ``a, b ∈ S`` against ``ord2(r)``."""

    DIFFERENT = "different"  # never equal: S and S+r are disjoint
    LESS = "less"  # always below on distinct pairs
    GREATER = "greater"  # always above


@dataclass
class ShiftCaseResult:
    case: ShiftCase
    holds: bool
    witnesses: list[tuple[Fraction, ...]] = field(default_factory=list)


@dataclass
class ShiftLemmaReport:
    r: Fraction
    size: int
    results: list[ShiftCaseResult] = field(default_factory=list)

    @property
    def applicable(self) -> list[ShiftCase]:
        return [result.case for result in self.results]

    @property
    def passed(self) -> bool:
        return all(result.holds for result in self.results)

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": format_rational(self.r),
            "size": self.size,
            "passed": self.passed,
            "cases": [
                {
                    "case": result.case.value,
                    "holds": result.holds,
                    "witnesses": [
                        [format_rational(x) for x in witness] for witness in result.witnesses
                    ],
                }
                for result in self.results
            ],
        }


def check_shift_lemma(points: Iterable[Fraction], r: Fraction) -> ShiftLemmaReport:
    """Classify ``(S, r)`` and verify each applicable conclusion over ``S ∪ (S+r)``.

    * different: ``S ∩ (S+r)`` is empty.
    * less: for distinct ``a, b`` in the union, ``ord2(a − b) <= ord2(r)`` with
      equality exactly when ``a − b = ±r``.
    * greater: for distinct ``a, b`` in the union, ``ord2(a − b) >= ord2(r)`` with
      equality exactly when one lies in ``S`` and the other in ``S+r``.

    Raises:
        PreconditionError: If ``r`` is zero.
    """
    r = Fraction(r)
    if r == 0:
        raise PreconditionError("shift r must be nonzero")
    s = sorted(set(Fraction(a) for a in points))
    v = ord2(r)
    distinct_orders = [ord2(b - a) for i, a in enumerate(s) for b in s[i + 1:]]
    report = ShiftLemmaReport(r=r, size=len(s))

    shifted = {a + r for a in s}
    base = set(s)
    union = sorted(base | shifted)
    union_pairs = [(a, b) for i, a in enumerate(union) for b in union[i + 1:]]

    if all(value != v for value in distinct_orders):
        clash = sorted(base & shifted)
        report.results.append(
            ShiftCaseResult(ShiftCase.DIFFERENT, not clash, [(x,) for x in clash])
        )
    if all(value < v for value in distinct_orders):
        witnesses: list[tuple[Fraction, ...]] = []
        for a, b in union_pairs:
            value = ord2(b - a)
            if value > v or (value == v) != (abs(b - a) == abs(r)):
                witnesses.append((a, b))
        report.results.append(ShiftCaseResult(ShiftCase.LESS, not witnesses, witnesses))
    if all(value > v for value in distinct_orders):
        witnesses = []
        for a, b in union_pairs:
            value = ord2(b - a)
            crossing = (a in base and b in shifted) or (a in shifted and b in base)
            if value < v or (value == v) != crossing:
                witnesses.append((a, b))
        report.results.append(ShiftCaseResult(ShiftCase.GREATER, not witnesses, witnesses))

    logger.info(
        "Shift check r=%s on %d points: cases=%s passed=%s",
        format_rational(r),
        len(s),
        ",".join(case.value for case in report.applicable) or "none",
        report.passed,
    )
    return report

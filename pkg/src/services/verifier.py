"""Ground-truth predicates on finite maps: chaotic, binary and the max/min obstruction.

A map ``f: S → X`` is *chaotic* when no ``a, b, c ∈ S`` with ``b − a = c − b``
have ``f(a) ≺ f(b) ≺ f(c)``, and *binary* when no triple with
``f(a) ≺ f(b) ≺ f(c)`` has ``ord2(b − a) = ord2(c − b)``. Every binary map is
chaotic.

Witnesses are always the lexicographically first triple of image positions
``(i, j, k)``, so the fast checks and the all-triples oracles agree exactly.

:class:`MapVerifier` runs all checks and never raises; failures inside a check
are recorded in the :class:`VerificationReport`.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from src.exceptions import InjectivityError
from src.services.order_oracle import BuiltinOrder, CountableOrder, builtin_order
from src.services.rational_core import format_rational, midpoint, ord2

logger = logging.getLogger(__name__)

Triple = tuple[Fraction, Fraction, Fraction]


# ---------------------------------------------------------------------------
# FiniteOrderedMap
# ---------------------------------------------------------------------------


class FiniteOrderedMap:
    """A finite injection from rationals into an order, kept sorted by image.

    Args:
        entries: ``(domain, image)`` pairs or a ``{domain: image}`` mapping.
        order: The target order; images must be points of it.

    Raises:
        InjectivityError: If a domain value or an image repeats.
    """

    def __init__(
        self,
        entries: Iterable[tuple[Fraction, Fraction]] | Mapping[Fraction, Fraction],
        order: CountableOrder,
    ) -> None:
        pairs = list(entries.items()) if isinstance(entries, Mapping) else list(entries)
        images: dict[Fraction, Fraction] = {}
        repeated: list[Fraction] = []
        for a, x in pairs:
            a, x = Fraction(a), Fraction(x)
            if a in images:
                repeated.append(a)
            images[a] = x
        if repeated:
            raise InjectivityError(
                f"Domain values repeat: {', '.join(format_rational(a) for a in repeated)}",
                duplicates=repeated,
            )
        seen: set[Fraction] = set()
        clashes: list[Fraction] = []
        for x in images.values():
            if x in seen:
                clashes.append(x)
            seen.add(x)
        if clashes:
            raise InjectivityError(
                f"Images repeat: {', '.join(format_rational(x) for x in clashes)}",
                duplicates=clashes,
            )
        self.order = order
        self._images = images
        self._domain_by_image: list[Fraction] = sorted(
            images, key=lambda a: order.sort_key(images[a])
        )
        self._positions: dict[Fraction, int] = {
            a: i for i, a in enumerate(self._domain_by_image)
        }

    @classmethod
    def from_ranks(
        cls, ranks: Iterable[tuple[Fraction, int]] | Mapping[Fraction, int]
    ) -> FiniteOrderedMap:
        """Build a map whose images are integer ranks under the standard order."""
        pairs = ranks.items() if isinstance(ranks, Mapping) else ranks
        return cls(
            ((Fraction(a), Fraction(rank)) for a, rank in pairs),
            builtin_order(BuiltinOrder.Q_STANDARD),
        )

    @classmethod
    def from_image_order(
        cls, domain_in_image_order: Iterable[Fraction | int]
    ) -> FiniteOrderedMap:
        """Build the map sending the k-th listed domain element to rank ``k``."""
        return cls.from_ranks(
            (Fraction(a), rank) for rank, a in enumerate(domain_in_image_order)
        )

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._images)

    def __contains__(self, a: object) -> bool:
        return a in self._images

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteOrderedMap):
            return NotImplemented
        return self._images == other._images and self.order is other.order

    def __repr__(self) -> str:
        shown = ", ".join(
            f"{format_rational(a)}->{format_rational(self._images[a])}"
            for a in self._domain_by_image[:8]
        )
        more = ", ..." if len(self) > 8 else ""
        return f"FiniteOrderedMap({self.order.name}: {shown}{more})"

    def image_of(self, a: Fraction) -> Fraction:
        return self._images[a]

    def position(self, a: Fraction) -> int:
        """Position of ``f(a)`` among the images, 0 for the least."""
        return self._positions[a]

    @property
    def domain(self) -> frozenset[Fraction]:
        return frozenset(self._images)

    @property
    def image(self) -> frozenset[Fraction]:
        return frozenset(self._images.values())

    @property
    def domain_in_image_order(self) -> list[Fraction]:
        """``[a_1, ..., a_m]`` with ``f(a_1) ≺ ... ≺ f(a_m)``."""
        return list(self._domain_by_image)

    @property
    def entries(self) -> list[tuple[Fraction, Fraction]]:
        """``(domain, image)`` pairs ascending by image."""
        return [(a, self._images[a]) for a in self._domain_by_image]

    def as_dict(self) -> dict[Fraction, Fraction]:
        return dict(self._images)

    # ------------------------------------------------------------------
    # Derived maps
    # ------------------------------------------------------------------

    def restrict(self, subset: Iterable[Fraction]) -> FiniteOrderedMap:
        """Restriction to ``subset ∩ domain``."""
        keep = {Fraction(a) for a in subset}
        return FiniteOrderedMap(
            ((a, x) for a, x in self.entries if a in keep), self.order
        )

    def contains_map(self, other: FiniteOrderedMap) -> bool:
        """Return ``True`` when ``other ⊂ self`` as sets of pairs."""
        return all(
            a in self._images and self._images[a] == x for a, x in other._images.items()
        )

    def extend(
        self, new_entries: Iterable[tuple[Fraction, Fraction]] | Mapping[Fraction, Fraction]
    ) -> FiniteOrderedMap:
        """Return ``self`` together with ``new_entries`` (injectivity re-checked)."""
        pairs = new_entries.items() if isinstance(new_entries, Mapping) else new_entries
        return FiniteOrderedMap([*self.entries, *pairs], self.order)

    def with_order(self, order: CountableOrder) -> FiniteOrderedMap:
        """Same pairs, re-sorted under ``order``."""
        return FiniteOrderedMap(self.entries, order)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def find_monotone_3ap(m: FiniteOrderedMap) -> Optional[Triple]:
    """Return the first ``(a, b, c)`` with ``f(a) ≺ f(b) ≺ f(c)`` and ``b − a = c − b``.

    For each pair of positions ``i < k`` the midpoint of ``a_i`` and ``a_k`` is
    looked up in the domain; O(n²) overall.
    """
    seq = m.domain_in_image_order
    n = len(seq)
    for i in range(n):
        a = seq[i]
        best: tuple[int, int] | None = None
        for k in range(i + 2, n):
            mid = midpoint(a, seq[k])
            if mid not in m:
                continue
            j = m.position(mid)
            if i < j < k and (best is None or (j, k) < best):
                best = (j, k)
        if best is not None:
            return a, seq[best[0]], seq[best[1]]
    return None


def find_binary_violation(m: FiniteOrderedMap) -> Optional[Triple]:
    """First ``(a, b, c)`` with ``f(a) ≺ f(b) ≺ f(c)`` and ``ord2(b − a) = ord2(c − b)``.

    For every position ``j`` a table maps each 2-adic order to the smallest
    ``k > j`` with ``ord2(a_k − a_j)`` equal to it, so each pair ``(i, j)`` is
    resolved by one lookup.
    """
    seq = m.domain_in_image_order
    n = len(seq)
    first_after: list[dict[Any, int]] = []
    for j in range(n):
        table: dict[Any, int] = {}
        b = seq[j]
        for k in range(n - 1, j, -1):
            table[ord2(seq[k] - b)] = k
        first_after.append(table)
    for i in range(n):
        a = seq[i]
        for j in range(i + 1, n):
            k = first_after[j].get(ord2(seq[j] - a))
            if k is not None:
                return a, seq[j], seq[k]
    return None


def find_monotone_3ap_bruteforce(m: FiniteOrderedMap) -> Optional[Triple]:
    """All-triples oracle for :func:`find_monotone_3ap`."""
    seq = m.domain_in_image_order
    n = len(seq)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if seq[j] - seq[i] == seq[k] - seq[j]:
                    return seq[i], seq[j], seq[k]
    return None


def find_binary_violation_bruteforce(m: FiniteOrderedMap) -> Optional[Triple]:
    """All-triples oracle for :func:`find_binary_violation`."""
    seq = m.domain_in_image_order
    n = len(seq)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if ord2(seq[j] - seq[i]) == ord2(seq[k] - seq[j]):
                    return seq[i], seq[j], seq[k]
    return None


def is_chaotic(m: FiniteOrderedMap) -> bool:
    return find_monotone_3ap(m) is None


def is_binary(m: FiniteOrderedMap) -> bool:
    return find_binary_violation(m) is None


def check_maxmin_obstruction(m: FiniteOrderedMap) -> Optional[Triple]:
    """Return ``(b, c, a)`` when the midpoint of the max- and min-image points is in the domain.

    ``a`` has the greatest image, ``b`` the least and ``c = (a + b) / 2``;
    then ``f(b) ≺ f(c) ≺ f(a)`` is a monotone 3-AP.
    """
    if len(m) < 3:
        return None
    seq = m.domain_in_image_order
    b, a = seq[0], seq[-1]
    c = midpoint(a, b)
    if c in m:
        return b, c, a
    return None


def format_triple(triple: Triple) -> str:
    return ",".join(format_rational(x) for x in triple)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


class MapClass(str, Enum):
    BINARY = "binary"
    CHAOTIC_ONLY = "chaotic-only"
    NOT_CHAOTIC = "not-chaotic"


EXIT_CODES: dict[MapClass, int] = {
    MapClass.BINARY: 0,
    MapClass.CHAOTIC_ONLY: 2,
    MapClass.NOT_CHAOTIC: 3,
}


@dataclass
class CheckResult:
    name: str
    status: str  # "passed", "failed", "error"
    details: dict[str, Any] = field(default_factory=dict)
    message: str = ""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class VerificationReport:
    """Outcome of :meth:`MapVerifier.verify`.

    Attributes:
        size: Number of entries checked.
        checks: One result per check, in run order.
        three_ap: First monotone 3-AP, if any.
        binary_violation: First binary violation, if any.
        maxmin_witness: Max/min midpoint witness, if any.
    """

    size: int = 0
    checks: list[CheckResult] = field(default_factory=list)
    three_ap: Optional[Triple] = None
    binary_violation: Optional[Triple] = None
    maxmin_witness: Optional[Triple] = None

    @property
    def errored(self) -> bool:
        return any(check.status == "error" for check in self.checks)

    @property
    def classification(self) -> MapClass:
        if self.three_ap is not None:
            return MapClass.NOT_CHAOTIC
        if self.binary_violation is not None:
            return MapClass.CHAOTIC_ONLY
        return MapClass.BINARY

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.classification]

    def to_dict(self) -> dict[str, Any]:
        def _triple(t: Optional[Triple]) -> Optional[list[str]]:
            return None if t is None else [format_rational(x) for x in t]

        return {
            "size": self.size,
            "classification": self.classification.value,
            "three_ap": _triple(self.three_ap),
            "binary_violation": _triple(self.binary_violation),
            "maxmin_witness": _triple(self.maxmin_witness),
            "checks": [c.to_dict() for c in self.checks],
        }


class MapVerifier:
    """Run the chaotic, binary and max/min checks on a finite map.

    Args:
        use_bruteforce: Use the all-triples oracles instead of the O(n²) checks.
    """

    def __init__(self, use_bruteforce: bool = False) -> None:
        self.use_bruteforce = use_bruteforce

    def verify(self, m: FiniteOrderedMap) -> VerificationReport:
        """Return a report; exceptions raised by a check are recorded, never propagated."""
        report = VerificationReport(size=len(m))
        checks = [
            ("chaotic", self._chaotic_check),
            ("binary", self._binary_check),
            ("maxmin_obstruction", self._maxmin_check),
        ]
        for check_name, check_fn in checks:
            try:
                report.checks.append(check_fn(m, report))
            except Exception as exc:
                logger.error("Verification check '%s' raised: %s", check_name, exc)
                report.checks.append(CheckResult(
                    name=check_name,
                    status="error",
                    details={"error": str(exc)},
                    message=f"Internal error in {check_name}: {exc}",
                ))
        logger.info(
            "Verified %d entries: %s", report.size, report.classification.value
        )
        return report

    def _chaotic_check(self, m: FiniteOrderedMap, report: VerificationReport) -> CheckResult:
        finder = find_monotone_3ap_bruteforce if self.use_bruteforce else find_monotone_3ap
        report.three_ap = finder(m)
        if report.three_ap is None:
            return CheckResult("chaotic", "passed", message="no monotone 3-AP")
        return CheckResult(
            "chaotic",
            "failed",
            details={"witness": [format_rational(x) for x in report.three_ap]},
            message=f"monotone 3-AP {format_triple(report.three_ap)}",
        )

    def _binary_check(self, m: FiniteOrderedMap, report: VerificationReport) -> CheckResult:
        finder = (
            find_binary_violation_bruteforce if self.use_bruteforce else find_binary_violation
        )
        report.binary_violation = finder(m)
        if report.binary_violation is None:
            return CheckResult("binary", "passed", message="no binary violation")
        a, b, c = report.binary_violation
        return CheckResult(
            "binary",
            "failed",
            details={
                "witness": [format_rational(x) for x in report.binary_violation],
                "ord2": int(ord2(b - a)),
            },
            message=f"binary violation {format_triple(report.binary_violation)}",
        )

    def _maxmin_check(self, m: FiniteOrderedMap, report: VerificationReport) -> CheckResult:
        report.maxmin_witness = check_maxmin_obstruction(m)
        if report.maxmin_witness is None:
            return CheckResult("maxmin_obstruction", "passed")
        return CheckResult(
            "maxmin_obstruction",
            "failed",
            details={"witness": [format_rational(x) for x in report.maxmin_witness]},
            message=f"midpoint of extreme images present: {format_triple(report.maxmin_witness)}",
        )

"""Custom exception classes for apforder.

All domain-level errors are raised as one of these typed exceptions so that
the command-line entry point can convert them to exit codes and stderr
diagnostics in one place.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any


class BudgetExceededError(Exception):
    """Raised when an enumeration search walks its whole budget without a hit.

    On an order declared without isolated points this never happens for the
    intervals the constructions ask for, so it is the operational sign of an
    isolated point (or of a maximum/minimum for the one-sided searches).

    Args:
        message: Human-readable description of the failed search.
        lower: Strict lower bound of the searched interval, ``None`` if unbounded.
        upper: Strict upper bound of the searched interval, ``None`` if unbounded.
        steps: Number of enumeration steps walked.
    """

    def __init__(
        self,
        message: str,
        lower: Fraction | None = None,
        upper: Fraction | None = None,
        steps: int = 0,
    ) -> None:
        super().__init__(message)
        self.lower: Fraction | None = lower
        self.upper: Fraction | None = upper
        self.steps: int = steps
        # Filled in by the constructor when the search ran inside a construction step.
        self.step: int | None = None
        self.partial_state: Any = None


class PreconditionError(Exception):
    """Raised when an operation is called outside its documented preconditions."""


class Ord2HypothesisError(PreconditionError):
    """Raised when the 2-adic hypothesis relating S and r fails.

    Args:
        message: Description of the violated hypothesis.
        pair: The pair ``(a, b)`` of domain elements that violates it.
        r: The shift whose 2-adic order was compared against.
    """

    def __init__(
        self,
        message: str,
        pair: tuple[Fraction, Fraction] | None = None,
        r: Fraction | None = None,
    ) -> None:
        super().__init__(message)
        self.pair: tuple[Fraction, Fraction] | None = pair
        self.r: Fraction | None = r


class BasisPreconditionError(PreconditionError):
    """Raised when inputs to the 2-adic basis routines have the wrong ord2 profile."""


class ProgressionError(PreconditionError):
    """Raised when a progression a, a+d, ..., a+Kd is not contained in a map's domain.

    Args:
        message: Description of the failure.
        missing: The first progression point absent from the domain.
    """

    def __init__(self, message: str, missing: Fraction | None = None) -> None:
        super().__init__(message)
        self.missing: Fraction | None = missing


class OrderPropertyError(PreconditionError):
    """Raised when an order's declared properties rule out the requested construction.

    Args:
        message: Which declared property blocks the request.
        order_name: Name of the offending order.
    """

    def __init__(self, message: str, order_name: str = "") -> None:
        super().__init__(message)
        self.order_name: str = order_name


class UnknownOrderError(Exception):
    """Raised when an order name is neither built in nor a readable description file.

    Args:
        name: The name or path that could not be resolved.
    """

    def __init__(self, name: str) -> None:
        super().__init__(f"Unknown order {name!r}")
        self.name: str = name


class OrderDescriptionError(Exception):
    """Raised when an order description file cannot be read or validated.

    Args:
        message: Human-readable description of the failure.
        path: The offending file.
    """

    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(message)
        self.path: str = path


class MapFormatError(Exception):
    """Raised when a map file line cannot be parsed.

    Args:
        message: Description of the parse failure.
        line_number: 1-based line number in the input, 0 when not line-specific.
    """

    def __init__(self, message: str, line_number: int = 0) -> None:
        super().__init__(message)
        self.line_number: int = line_number


class InjectivityError(Exception):
    """Raised when a finite map repeats a domain value or an image.

    Args:
        message: Description of the failure.
        duplicates: The repeated values.
    """

    def __init__(self, message: str, duplicates: list[Fraction] | None = None) -> None:
        super().__init__(message)
        self.duplicates: list[Fraction] = duplicates or []


class SearchLimitError(Exception):
    """Raised when the extension search spends its node budget (inconclusive).

    Args:
        message: Description of the exhausted search.
        nodes: Nodes visited.
        depth_reached: Largest arrangement size reached before giving up.
    """

    def __init__(self, message: str, nodes: int = 0, depth_reached: int = 0) -> None:
        super().__init__(message)
        self.nodes: int = nodes
        self.depth_reached: int = depth_reached


class QSequenceCapError(Exception):
    """Raised when no q-sequence term is found within the candidate cap.

    Args:
        message: Description of the overflow.
        index: Index n of the term being searched for.
        cap: The candidate cap that was exhausted.
    """

    def __init__(self, message: str, index: int = 0, cap: int = 0) -> None:
        super().__init__(message)
        self.index: int = index
        self.cap: int = cap


class UnexpectedSuccessError(Exception):
    """Raised when a negative run completes although the order has isolated points.

    Args:
        message: Description of what was expected.
        report: The structured run report.
    """

    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report: Any = report


class ConstructionInvariantError(Exception):
    """Raised when an internal construction invariant fails (a bug, not bad input)."""

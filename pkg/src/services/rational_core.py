"""Exact rational arithmetic and the 2-adic order.

Rationals are :class:`fractions.Fraction` values, which are always stored
reduced with a positive denominator, so equality is structural and
:func:`ord2` is a pure function of the stored integers.

The 2-adic order of a nonzero rational is the exponent of 2 in the numerator
minus the exponent of 2 in the denominator; ``ord2(0)`` is :data:`INFINITY`,
which compares greater than every integer.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Rational = Fraction

#: Either a (possibly negative) integer or :data:`INFINITY`.
TwoAdicOrder = Union[int, float]

INFINITY: float = math.inf


def trailing_zeros(n: int) -> int:
    """Return the number of trailing binary zeros of a nonzero integer."""
    if n == 0:
        raise ValueError("trailing_zeros(0) is undefined")
    return (n & -n).bit_length() - 1


def ord2(q: Fraction | int) -> TwoAdicOrder:
    """Return the 2-adic order of ``q``.

    Examples:
        >>> ord2(Fraction(12))
        2
        >>> ord2(Fraction(3, 8))
        -3
        >>> ord2(Fraction(0))
        inf
    """
    q = Fraction(q)
    if q == 0:
        return INFINITY
    return trailing_zeros(q.numerator) - trailing_zeros(q.denominator)


def in_z2(q: Fraction | int) -> bool:
    """Return ``True`` when ``q`` lies in Z_(2), i.e. has odd denominator."""
    return ord2(q) >= 0


def midpoint(a: Fraction, b: Fraction) -> Fraction:
    """Return ``(a + b) / 2`` exactly."""
    return (Fraction(a) + Fraction(b)) / 2


def power_of_two(n: int) -> Fraction:
    """Return ``2**n`` as an exact rational, for negative ``n`` too."""
    if n >= 0:
        return Fraction(1 << n)
    return Fraction(1, 1 << -n)


def dyadic_exponent(q: Fraction | int) -> int:
    """Return ``e >= 0`` with ``2**e * q`` in Z_(2) and ``e`` minimal."""
    value = ord2(q)
    return 0 if value == INFINITY or value >= 0 else -int(value)


def residue_mod_power_of_two(q: Fraction | int, k: int) -> int:
    """Return the class of ``q`` in Z_(2) / 2**k Z_(2) as an integer in ``[0, 2**k)``.

    Two elements of Z_(2) have equal residues exactly when their difference
    has ord2 at least ``k``.

    Raises:
        ValueError: If ``q`` is not in Z_(2) or ``k`` is negative.
    """
    q = Fraction(q)
    if k < 0:
        raise ValueError(f"negative modulus exponent {k}")
    if not in_z2(q):
        raise ValueError(f"{format_rational(q)} is not in Z_(2)")
    modulus = 1 << k
    return (q.numerator * pow(q.denominator, -1, modulus)) % modulus if k else 0


def parse_rational(text: str) -> Fraction:
    """Parse the ``p/q`` text form (``q`` optional) into a reduced rational.

    Raises:
        ValueError: If ``text`` is not of the form ``p`` or ``p/q`` with ``q != 0``.
    """
    cleaned = text.strip()
    if not cleaned:
        raise ValueError("empty rational")
    numerator, sep, denominator = cleaned.partition("/")
    try:
        if sep:
            return Fraction(int(numerator), int(denominator))
        return Fraction(int(numerator))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid rational {text!r}: {exc}") from exc


def format_rational(q: Fraction | int) -> str:
    """Return the ``p/q`` text form, omitting ``q`` when it is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_ord2(value: TwoAdicOrder) -> str:
    """Return ``"inf"`` for :data:`INFINITY`, else the integer as text."""
    return "inf" if value == INFINITY else str(int(value))

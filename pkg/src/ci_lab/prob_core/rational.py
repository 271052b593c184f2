"""
Exact rational helpers.

Probabilities are `fractions.Fraction` end-to-end; Fraction already keeps
lowest terms with a positive denominator. This module only fixes the
"num/den" text form used by every wire format.
"""

from __future__ import annotations

import re
from fractions import Fraction

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(text: str) -> Fraction:
    """
    Parse "num/den" or "num" into a Fraction.

    Decimal strings are rejected so that a table file cannot smuggle in
    binary floating point.

    Raises:
        ValueError: If text is not an integer ratio or the denominator is zero
    """
    match = _RATIONAL_RE.match(text)
    if match is None:
        raise ValueError(f"Not a rational of the form num/den: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise ValueError(f"Zero denominator: {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction | int) -> str:
    """Render as "num/den", omitting the denominator when it is 1."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def as_rational(value: Fraction | int | str) -> Fraction:
    """Coerce int, Fraction or "num/den" text; floats are not accepted."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"Probabilities must be exact, got {type(value).__name__}")
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)

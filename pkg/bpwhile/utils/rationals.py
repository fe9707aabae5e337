"""Parsing and formatting of exact rationals given on the command line or in corpus files."""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from ..errors import InvalidParameterError

_POWER_FORM = re.compile(r"^\s*(-?\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")
_RATIO_FORM = re.compile(r"^\s*(-?\d+)\s*/\s*(\d+)\s*$")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Accept ``a/b``, ``a/2^m``, integers and decimals; return a canonical Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    raw = str(text).strip()
    match = _POWER_FORM.match(raw)
    if match:
        return Fraction(int(match.group(1)), 1 << int(match.group(2)))
    match = _RATIO_FORM.match(raw)
    if match:
        denominator = int(match.group(2))
        if denominator == 0:
            raise InvalidParameterError(f"zero denominator in {raw!r}")
        return Fraction(int(match.group(1)), denominator)
    try:
        return Fraction(Decimal(raw))
    except (InvalidOperation, ValueError) as exc:
        raise InvalidParameterError(f"not a rational number: {raw!r}") from exc


def is_dyadic(value: Fraction) -> bool:
    denominator = value.denominator
    return denominator & (denominator - 1) == 0


def parse_dyadic(text: str | int | Fraction, name: str = "value") -> Fraction:
    """Like :func:`parse_rational` but insist on a power-of-two denominator."""
    value = parse_rational(text)
    if not is_dyadic(value):
        raise InvalidParameterError(f"{name} must be dyadic (a/2^m), got {format_rational(value)}")
    return value


def dyadic_exponent(value: Fraction) -> int:
    """Return m such that value = a / 2^m with a odd (0 for integers)."""
    return value.denominator.bit_length() - 1


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def decimal_approximation(value: Fraction, digits: int = 12) -> str:
    # Display only; decisions never look at this.
    return f"{float(value):.{digits}g}"

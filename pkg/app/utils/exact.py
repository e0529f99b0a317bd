"""Exact rational helpers for threshold comparisons."""

import math
from fractions import Fraction


def as_fraction(value: float | Fraction) -> Fraction:
    """Exact rational for a user-supplied decimal (0.1 stays 1/10)."""
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value))


def round_half_up(value: Fraction) -> int:
    return math.floor(value + Fraction(1, 2))


def ceil_fraction(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def floor_fraction(value: Fraction) -> int:
    return value.numerator // value.denominator

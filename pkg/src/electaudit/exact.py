"""Exact rational parsing and deterministic decimal rendering.

All probabilities in this package are fractions.Fraction values. Decimal
strings exist only for display; they are produced by round-half-even at a
fixed number of significant digits so that reports are byte-reproducible.
"""

from __future__ import annotations

import decimal
from fractions import Fraction


def parse_ratio(value) -> Fraction:
    """Parse a number given as int, Fraction, "2/3", or a decimal string like "0.002".

    Floats are rejected: binary floats silently misrepresent decimal inputs
    and exactness is load-bearing here.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("refusing float %r; pass a string or Fraction" % value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError("cannot parse %r as a ratio" % (value,))


def decimal_string(value: Fraction, significant: int = 4) -> str:
    """Render an exact rational with `significant` digits, round-half-even.

    Uses decimal arithmetic on the exact numerator/denominator, so arbitrarily
    large or small magnitudes render correctly (no float underflow).
    """
    value = Fraction(value)
    if value == 0:
        return "0"
    with decimal.localcontext() as ctx:
        ctx.prec = significant
        ctx.rounding = decimal.ROUND_HALF_EVEN
        ctx.Emax = decimal.MAX_EMAX
        ctx.Emin = decimal.MIN_EMIN
        d = decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)
    return str(d)


def percent_string(value: Fraction, significant: int = 3) -> str:
    """Render an exact rational as a percentage string, e.g. Fraction(8, 9) -> "88.9%"."""
    value = Fraction(value)
    return decimal_string(value * 100, significant) + "%"


def ratio_json(value: Fraction) -> dict:
    """JSON form for an exact probability.

    Numerator and denominator are strings: the exact integers routinely exceed
    2**53 and would corrupt silently in JavaScript consumers.
    """
    value = Fraction(value)
    return {
        "numerator": str(value.numerator),
        "denominator": str(value.denominator),
        "decimal": decimal_string(value),
        "percent": percent_string(value),
    }


def ratio_from_json(obj) -> Fraction:
    return Fraction(int(obj["numerator"]), int(obj["denominator"]))


def ceil_div(num: int, den: int) -> int:
    """Exact ceiling of num/den for positive den."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    return -(-num // den)


def ceil_fraction(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def floor_fraction(value: Fraction) -> int:
    return value.numerator // value.denominator

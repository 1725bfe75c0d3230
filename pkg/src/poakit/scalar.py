"""Scalar helpers: exact rationals by default, binary64 floats on request."""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from numbers import Rational, Real

from .errors import ValidationError

RATIONAL = "rational"
FLOAT = "float"
ARITHMETICS = (RATIONAL, FLOAT)

FLOAT_TOL = 1e-9


def check_arithmetic(arithmetic: str) -> str:
    if arithmetic not in ARITHMETICS:
        raise ValidationError(f"unknown arithmetic {arithmetic!r}; expected one of {ARITHMETICS}")
    return arithmetic


def parse_scalar(value) -> Fraction:
    """Parse an int, float, Fraction or decimal/fraction string exactly."""
    if isinstance(value, bool):
        raise ValidationError(f"boolean is not a scalar: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite scalar {value!r}")
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValidationError(f"non-finite scalar {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse scalar {value!r}") from exc
    if isinstance(value, Real):
        return parse_scalar(float(value))
    raise ValidationError(f"unsupported scalar type {type(value).__name__}")


def convert(value, arithmetic: str = RATIONAL):
    if arithmetic == FLOAT:
        return float(value)
    return parse_scalar(value)


def format_scalar(value) -> str:
    """Lossless string form: "p/q" or "p" for rationals, repr for floats."""
    if isinstance(value, float):
        return repr(value)
    q = parse_scalar(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def to_decimal_string(value, digits: int = 12) -> str:
    """Rounded decimal rendering, used for CSV/Markdown and human-facing reports."""
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    q = parse_scalar(value)
    d = Decimal(q.numerator) / Decimal(q.denominator)
    return f"{d:.{digits}g}"


def rationalize(x: float | Decimal | str, digits: int = 40) -> Fraction:
    """Round an irrational-valued decimal to a rational with ``digits`` significant digits."""
    d = Decimal(x) if not isinstance(x, Decimal) else x
    return Fraction(Decimal(f"{d:.{digits}g}"))

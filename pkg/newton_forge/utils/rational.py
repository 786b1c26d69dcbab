import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction

from newton_forge.utils.errors import InputFormatError

_RATIONAL_PATTERN = re.compile(r'^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$')


def parse_rational(value):
    """
    Parse a rational number from its string form or from a number.

    Accepted forms are "p/q", "p", Python ints and Fractions. Floats are
    rejected: every quantity in the geometry kernel is exact.

    Args:
        value (str or int or Fraction): Value to parse.

    Returns:
        Fraction: The value in lowest terms with a positive denominator.

    Raises:
        InputFormatError: If the value is not an exact rational.
    """
    if isinstance(value, bool):
        raise InputFormatError(f"not a rational: {value!r}")

    if isinstance(value, Fraction):
        return value

    if isinstance(value, int):
        return Fraction(value)

    if not isinstance(value, str):
        raise InputFormatError(f"not a rational: {value!r}")

    match = _RATIONAL_PATTERN.match(value)
    if not match:
        raise InputFormatError(f"not a rational: {value!r}")

    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise InputFormatError(f"zero denominator in {value!r}")

    return Fraction(numerator, denominator)


def format_rational(value):
    """
    Format a rational as "numerator/denominator" (denominator omitted when 1).

    Args:
        value (Fraction or int): Value to format.

    Returns:
        str: Canonical string form.
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_decimal_string(value, digits=12):
    """
    Render a rational with a fixed number of significant digits.

    Args:
        value (Fraction or int): Value to render.
        digits (int, optional): Significant digits. Default is 12.

    Returns:
        str: Decimal approximation, e.g. "0.666666666667".
    """
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = digits
        approx = Decimal(value.numerator) / Decimal(value.denominator)
    return format(approx, f'.{digits}g')


def parse_vector(text):
    """
    Parse a comma separated vector such as "1,-5,2/3".

    Args:
        text (str): Comma separated rationals.

    Returns:
        list: List of Fractions.
    """
    if not isinstance(text, str) or not text.strip():
        raise InputFormatError(f"not a vector: {text!r}")
    return [parse_rational(part) for part in text.split(',')]


def lcm_of_denominators(values):
    """Least common multiple of the denominators of a collection of rationals."""
    return math.lcm(1, *(Fraction(value).denominator for value in values))

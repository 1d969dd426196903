"""Distances are ``Fraction`` when exact and ``float`` otherwise.

Exact values compare without tolerance. Floats use a relative tolerance
``TOL`` for tie detection only; strict inequalities are evaluated as-is.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float]

TOL = 1e-9

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def parse_scalar(text) -> Scalar:
    """Parse ``p``, ``p/q`` exactly; anything else numeric becomes a float."""
    if isinstance(text, bool):
        raise ValueError(f"not a number: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        if not math.isfinite(text):
            raise ValueError(f"non-finite value {text!r}")
        return text
    s = str(text).strip()
    if _RATIONAL.match(s):
        num, _, den = s.replace(" ", "").partition("/")
        if den and int(den) == 0:
            raise ValueError(f"zero denominator in {s!r}")
        return Fraction(int(num), int(den) if den else 1)
    value = float(s)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {s!r}")
    return value


def fmt_scalar(x: Scalar) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return repr(float(x))


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int))


def ties(a: Scalar, b: Scalar) -> bool:
    """Equality for argmin purposes."""
    if is_exact(a) and is_exact(b):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=TOL, abs_tol=0.0)


def half(x: Scalar) -> Scalar:
    return x / 2 if is_exact(x) else x / 2.0

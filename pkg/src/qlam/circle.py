"""Exact arithmetic on angles in R/Z under the doubling map.

Angles are plain :class:`fractions.Fraction` values normalized to ``[0, 1)``.
Only rational angles are representable; every construction in this package is
driven by rational input, so nothing here ever touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Angle = Fraction
AngleLike = Union[Fraction, int, str]

HALF = Fraction(1, 2)
ZERO = Fraction(0)


class AngleParseError(ValueError):
    pass


def angle(value: AngleLike) -> Angle:
    """Normalize ``value`` to an angle in ``[0, 1)``.

    Strings are parsed as ``p/q`` (unreduced input is accepted) or as integers.
    """
    if isinstance(value, str):
        return parse_angle(value)
    return Fraction(value) % 1


def parse_angle(text: str) -> Angle:
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise AngleParseError(f"not a fraction: {text!r}") from None
    if q == 0:
        raise AngleParseError(f"zero denominator: {text!r}")
    return Fraction(p, q) % 1


def format_angle(a: Angle) -> str:
    a = Fraction(a) % 1
    return f"{a.numerator}/{a.denominator}"


def double(a: Angle) -> Angle:
    return (2 * a) % 1


def iterate(a: Angle, n: int) -> Angle:
    """``n``-fold doubling, computed in one step."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return (a * (1 << n)) % 1


def halves(a: Angle) -> tuple[Angle, Angle]:
    """The two preimages of ``a``: ``(a/2, a/2 + 1/2)``."""
    h = (a % 1) / 2
    return h, h + HALF


def conjugate(a: Angle) -> Angle:
    """Complex conjugation on the circle, ``a -> -a``."""
    return (-a) % 1


def rotate(a: Angle, by: Angle) -> Angle:
    return (a + by) % 1


@dataclass(frozen=True)
class OrbitInfo:
    preperiod: int
    period: int
    orbit: tuple[Angle, ...]

    @property
    def is_periodic(self) -> bool:
        return self.preperiod == 0

    @property
    def cycle(self) -> tuple[Angle, ...]:
        return self.orbit[self.preperiod:]


def orbit_info(a: Angle) -> OrbitInfo:
    """Minimal preperiod and period of ``a`` under doubling."""
    a = Fraction(a) % 1
    seen: dict[Angle, int] = {}
    orbit: list[Angle] = []
    x = a
    while x not in seen:
        seen[x] = len(orbit)
        orbit.append(x)
        x = double(x)
    start = seen[x]
    return OrbitInfo(start, len(orbit) - start, tuple(orbit))


def is_periodic(a: Angle) -> bool:
    # the odd part of the denominator is all that survives doubling
    return Fraction(a).denominator % 2 == 1


def period(a: Angle) -> int:
    return orbit_info(a).period


def arc_length(start: Angle, end: Angle) -> Angle:
    """Length of the counterclockwise arc from ``start`` to ``end``."""
    return (end - start) % 1


def in_open_arc(x: Angle, start: Angle, end: Angle) -> bool:
    """True iff ``x`` lies strictly inside the ccw arc from ``start`` to ``end``.

    With ``start == end`` the arc is read as the full circle minus that point.
    """
    d = (x - start) % 1
    if start == end:
        return d != 0
    return 0 < d < (end - start) % 1


def in_closed_arc(x: Angle, start: Angle, end: Angle) -> bool:
    d = (x - start) % 1
    return d <= (end - start) % 1


def periodic_angles(n: int) -> list[Angle]:
    """All angles fixed by the ``n``-th iterate, sorted."""
    q = (1 << n) - 1
    return sorted({Fraction(j, q) for j in range(q)})


def exact_period_angles(n: int) -> list[Angle]:
    return [a for a in periodic_angles(n) if period(a) == n]

"""Leaves as unordered angle pairs: crossing tests, images and pullbacks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circle import (
    HALF,
    Angle,
    AngleLike,
    angle,
    conjugate,
    double,
    format_angle,
    halves,
    iterate,
    parse_angle,
    rotate,
)


class ChordError(ValueError):
    pass


class AmbiguousPairing(ChordError):
    pass


class DegenerateInput(ChordError):
    pass


@dataclass(frozen=True, order=True)
class Chord:
    """A geodesic chord of the unit disk, stored with ``a <= b``.

    ``a == b`` is a degenerate leaf (a single circle point).
    """

    a: Angle
    b: Angle

    def __init__(self, a: AngleLike, b: AngleLike):
        x, y = angle(a), angle(b)
        if y < x:
            x, y = y, x
        object.__setattr__(self, "a", x)
        object.__setattr__(self, "b", y)
        object.__setattr__(self, "_hash", hash((x, y)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def endpoints(self) -> tuple[Angle, Angle]:
        return self.a, self.b

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    def __contains__(self, x: Angle) -> bool:
        return x == self.a or x == self.b

    def __str__(self) -> str:
        return f"{format_angle(self.a)} {format_angle(self.b)}"

    def __repr__(self) -> str:
        return f"Chord({format_angle(self.a)}, {format_angle(self.b)})"

    def other(self, x: Angle) -> Angle:
        if x == self.a:
            return self.b
        if x == self.b:
            return self.a
        raise ValueError(f"{x} is not an endpoint of {self!r}")

    def shares_endpoint(self, other: Chord) -> bool:
        return bool({self.a, self.b} & {other.a, other.b})


def parse_chord(text: str) -> Chord:
    parts = text.split()
    if len(parts) != 2:
        raise ChordError(f"expected two angles, got {text!r}")
    return Chord(parse_angle(parts[0]), parse_angle(parts[1]))


def crosses(c1: Chord, c2: Chord) -> bool:
    """Linked endpoints. Shared endpoints and degenerate chords never cross."""
    a, b, x, y = c1.a, c1.b, c2.a, c2.b
    if a == b or x == y or a == x or a == y or b == x or b == y:
        return False
    # endpoints are normalized with a < b, so the arc test needs no wraparound
    return (a < x < b) != (a < y < b)


def image(c: Chord) -> Chord:
    return Chord(double(c.a), double(c.b))


def image_n(c: Chord, n: int) -> Chord:
    return Chord(iterate(c.a, n), iterate(c.b, n))


def chord_conjugate(c: Chord) -> Chord:
    return Chord(conjugate(c.a), conjugate(c.b))


def chord_rotate(c: Chord, by: Angle) -> Chord:
    return Chord(rotate(c.a, by), rotate(c.b, by))


def opposite(c: Chord) -> Chord:
    """The half-turn image ``-c``."""
    return chord_rotate(c, HALF)


def chord_length(c: Chord) -> Fraction:
    d = (c.b - c.a) % 1
    return min(d, 1 - d)


def critical_chord(theta: Angle) -> Chord:
    """The diameter joining the two halves of ``theta``."""
    return Chord(*halves(theta))


def preimage_pairings(c: Chord) -> tuple[tuple[Chord, Chord], tuple[Chord, Chord]]:
    a1, a2 = halves(c.a)
    b1, b2 = halves(c.b)
    return (Chord(a1, b1), Chord(a2, b2)), (Chord(a1, b2), Chord(a2, b1))


def pullbacks_avoiding(c: Chord, walls: tuple[Chord, ...]) -> list[Chord]:
    """All preimage chords of ``c`` that cross none of ``walls``.

    Both pairings are kept when both qualify; callers that need a unique
    answer use :func:`sibling_preimages`.
    """
    out: list[Chord] = []
    for pair in preimage_pairings(c):
        if all(not crosses(p, w) for p in pair for w in walls):
            for p in pair:
                if p not in out:
                    out.append(p)
    return out


def sibling_preimages(c: Chord, crit: Chord) -> tuple[Chord, Chord]:
    """The pairing of the preimages of ``c`` that does not cross ``crit``."""
    if c.degenerate:
        raise DegenerateInput(f"degenerate chord {c!r} has no sibling pair")
    good = [
        pair
        for pair in preimage_pairings(c)
        if not crosses(pair[0], crit) and not crosses(pair[1], crit)
    ]
    if not good:
        raise ChordError(f"no preimage pairing of {c!r} avoids {crit!r}")
    if len(good) > 1 and set(good[0]) != set(good[1]):
        raise AmbiguousPairing(f"both preimage pairings of {c!r} avoid {crit!r}")
    first, second = sorted(good[0])
    return first, second

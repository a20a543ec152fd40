"""Itineraries relative to a critical partition of the circle.

A partition is given by "walls": groups of circle points (the vertices of a
critical leaf, of a critical polygon, or of the pair ``M, -M``). The circle
minus the wall points falls into arcs of length at most 1/2, on each of which
doubling is injective. Two angles of a clean invariant lamination are
equivalent exactly when their itineraries through these arcs agree, with a
wall point recorded by its group.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Sequence

from .circle import Angle, iterate, orbit_info

Symbol = tuple[str, int]


@dataclass(frozen=True)
class Partition:
    walls: tuple[tuple[Angle, ...], ...]

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[Angle]]) -> Partition:
        return cls(tuple(tuple(sorted({Fraction(x) % 1 for x in g})) for g in groups))

    @cached_property
    def points(self) -> tuple[Angle, ...]:
        return tuple(sorted({x for g in self.walls for x in g}))

    @cached_property
    def _arcs(self) -> tuple[tuple[Angle, Angle], ...]:
        pts = self.points
        if not pts:
            return ((Fraction(0), Fraction(0)),)
        return tuple((pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts)))

    def arcs(self) -> list[tuple[Angle, Angle]]:
        """Closed arcs between consecutive wall points, ccw."""
        return list(self._arcs)

    @cached_property
    def _group(self) -> dict[Angle, int]:
        return {x: i for i, g in enumerate(self.walls) for x in g}

    def group_of(self, x: Angle):
        return self._group.get(x)

    def _locate(self, x: Angle) -> int:
        # index of the arc whose interior holds x, or of the arc starting at x
        return (bisect_right(self.points, x) - 1) % len(self.points)

    def symbol(self, x: Angle) -> Symbol:
        g = self._group.get(x)
        if g is not None:
            return ("w", g)
        if not self.points:
            return ("r", 0)
        return ("r", self._locate(x))

    def arc_index_closed(self, x: Angle) -> list[int]:
        if not self.points:
            return [0]
        i = self._locate(x)
        if x in self._group:
            return sorted({(i - 1) % len(self.points), i})
        return [i]

    def itinerary(self, x: Angle) -> tuple[tuple[Symbol, ...], tuple[Symbol, ...]]:
        """Canonical (prefix, cycle) form of the symbol sequence of ``x``."""
        info = orbit_info(x)
        syms = [self.symbol(y) for y in info.orbit]
        pre, cyc = syms[: info.preperiod], syms[info.preperiod:]
        return _canonical(pre, cyc)


def _canonical(pre, cyc):
    # shortest cycle
    n = len(cyc)
    for d in range(1, n + 1):
        if n % d == 0 and cyc == cyc[:d] * (n // d):
            cyc = cyc[:d]
            break
    # absorb prefix tail into the cycle
    while pre and pre[-1] == cyc[-1]:
        pre = pre[:-1]
        cyc = [cyc[-1]] + cyc[:-1]
    return tuple(pre), tuple(cyc)


def _linear(arc: tuple[Angle, Angle]) -> list[tuple[Fraction, Fraction]]:
    s, e = arc
    if s == e:
        return [(Fraction(0), Fraction(1))]
    if s < e:
        return [(s, e)]
    return [(s, Fraction(1)), (Fraction(0), e)]


def cylinder(part: Partition, word: Sequence[int]) -> list[tuple[Fraction, Fraction, int]]:
    """Closed pieces ``(lo, hi, j)`` of ``{x : doubling^i(x) in arc word[i]}``.

    On each piece the ``(len(word)-1)``-fold doubling is ``x -> 2^i x - j``
    with values in ``[0, 1]``.
    """
    arcs = part.arcs()
    pieces = [(lo, hi, 0) for lo, hi in _linear(arcs[word[0]])]
    for i in range(1, len(word)):
        scale = 1 << (i - 1)
        target = _linear(arcs[word[i]])
        nxt = []
        for lo, hi, j in pieces:
            u, v = scale * lo - j, scale * hi - j
            for off, a, b in ((0, 2 * u, min(2 * v, 1)), (1, max(2 * u, 1) - 1, 2 * v - 1)):
                if a > b:
                    continue
                for tlo, thi in target:
                    ya, yb = max(a, tlo), min(b, thi)
                    if ya > yb:
                        continue
                    jj = 2 * j + off
                    nxt.append((Fraction(ya + jj, 2 * scale), Fraction(yb + jj, 2 * scale), jj))
        pieces = nxt
        if not pieces:
            break
    return pieces


def fixed_points(part: Partition, word: Sequence[int]) -> list[Angle]:
    """Angles fixed by ``len(word)``-fold doubling whose orbit follows ``word``."""
    k = len(word)
    q = (1 << k) - 1
    out = set()
    for lo, hi, j in cylinder(part, word):
        for jj in (2 * j, 2 * j + 1):
            x = Fraction(jj, q)
            if lo <= x <= hi and iterate(x % 1, k) == x % 1:
                out.add(x % 1)
    return sorted(out)


def preimages_along(part: Partition, word: Sequence[int], z: Angle) -> list[Angle]:
    """Angles ``x`` following ``word`` with ``doubling^len(word)(x) == z``."""
    k = len(word)
    out = set()
    scale = 1 << (k - 1)
    for lo, hi, j in cylinder(part, word):
        for jj in (2 * j, 2 * j + 1):
            x = Fraction(z + jj, 2 * scale)
            if lo <= x <= hi:
                out.add(x % 1)
    return sorted(x for x in out if iterate(x, k) == z)


def same_class(part: Partition, x: Angle, y: Angle) -> bool:
    return part.itinerary(x) == part.itinerary(y)


def periodic_class(part: Partition, y: Angle, max_rotation: int = 1) -> list[Angle]:
    """All periodic angles with the same itinerary as the periodic angle ``y``."""
    info = orbit_info(y)
    if info.preperiod:
        raise ValueError("y must be periodic")
    target = part.itinerary(y)
    out = {y}
    for r in range(1, max_rotation + 1):
        # only arcs (not walls) constrain the search; wall hits are filtered below
        words = _closed_words(part, info.orbit, r)
        for word in words:
            for x in fixed_points(part, word):
                if part.itinerary(x) == target:
                    out.add(x)
    return sorted(out)


def _closed_words(part: Partition, orbit: Sequence[Angle], r: int) -> list[list[int]]:
    choices = [part.arc_index_closed(y) for y in orbit] * r
    words: list[list[int]] = [[]]
    for ch in choices:
        words = [w + [c] for w in words for c in ch]
        if len(words) > 64:
            raise ValueError("too many wall hits along the orbit")
    return words


def preperiodic_class(part: Partition, x: Angle, max_rotation: int = 1) -> list[Angle]:
    """All angles with the same itinerary as ``x`` (eventually periodic)."""
    info = orbit_info(x)
    if info.preperiod == 0:
        return periodic_class(part, x, max_rotation)
    l = info.preperiod
    y = info.orbit[l]
    target = part.itinerary(x)
    out = set()
    for z in periodic_class(part, y, max_rotation):
        for word in _closed_words(part, info.orbit[:l], 1):
            for w in preimages_along(part, word, z):
                if part.itinerary(w) == target:
                    out.add(w)
    return sorted(out)

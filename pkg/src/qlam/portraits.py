"""Orbit portraits: periodic cycles of pairwise unlinked chords, their
co-existence, and the principal (rotational) portrait each one sits beside."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

from .chords import Chord, crosses, image, parse_chord
from .circle import Angle, double, exact_period_angles, orbit_info
from .lamination import find_crossing


class PortraitError(ValueError):
    pass


class Crossing(PortraitError):
    pass


class NotPeriodic(PortraitError):
    pass


class NotFound(LookupError):
    pass


class MultipleFound(RuntimeError):
    """Two principal portraits co-exist with one portrait. Uniqueness is a
    theorem, so this signals a bug rather than a data condition."""


@dataclass(frozen=True)
class OrbitPortrait:
    chords: tuple[Chord, ...]

    def __post_init__(self):
        n = len(self.chords)
        for i, c in enumerate(self.chords):
            if image(c) != self.chords[(i + 1) % n]:
                raise PortraitError(f"{c} does not map to the next chord of the cycle")
        pair = find_crossing(self.chords)
        if pair is not None:
            raise Crossing(f"{pair[0]} crosses {pair[1]}")

    def __len__(self) -> int:
        return len(self.chords)

    @property
    def chord_set(self) -> frozenset[Chord]:
        return frozenset(self.chords)

    def vertices(self) -> list[Angle]:
        return sorted({x for c in self.chords for x in c.endpoints})

    def conjugate(self) -> OrbitPortrait:
        from .chords import chord_conjugate
        return OrbitPortrait(tuple(chord_conjugate(c) for c in self.chords))

    def __str__(self) -> str:
        return "\n".join(["# portrait"] + [str(c) for c in self.chords])


def portrait_from_chord(c: Chord) -> OrbitPortrait:
    """The forward cycle of a chord with periodic endpoints."""
    for x in c.endpoints:
        if orbit_info(x).preperiod:
            raise NotPeriodic(f"endpoint {x} of {c} is not periodic")
    if c.degenerate:
        raise PortraitError("degenerate chord")
    cycle = [c]
    cur = image(c)
    while cur != c:
        cycle.append(cur)
        cur = image(cur)
    return OrbitPortrait(tuple(cycle))


def loads_portrait(text: str) -> OrbitPortrait:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise PortraitError("empty portrait")
    return portrait_from_chord(parse_chord(lines[0]))


def coexist(P: OrbitPortrait, Q: OrbitPortrait) -> bool:
    if P.chord_set == Q.chord_set:
        return True
    return not any(crosses(p, q) for p in P.chords for q in Q.chords)


def _rotates(points: list[Angle]) -> bool:
    """Doubling permutes the sorted points by a cyclic shift."""
    pts = sorted(points)
    pos = {x: i for i, x in enumerate(pts)}
    n = len(pts)
    try:
        targets = [pos[double(x)] for x in pts]
    except KeyError:
        return False
    shift = targets[0]
    return all(targets[i] == (i + shift) % n for i in range(n))


def is_principal(P: OrbitPortrait) -> bool:
    return _rotates(P.vertices())


def is_formal(P: OrbitPortrait) -> bool:
    """All vertices share one exact period."""
    return len({orbit_info(x).period for x in P.vertices()}) == 1


def principal_portraits(period_bound: int) -> list[OrbitPortrait]:
    """All principal portraits whose vertices have period at most the bound,
    one per rotational cycle (the fixed point 0 has no chords and is skipped)."""
    out = []
    for n in range(2, period_bound + 1):
        seen: set[Angle] = set()
        for x in exact_period_angles(n):
            if x in seen:
                continue
            cyc = [x]
            y = double(x)
            while y != x:
                cyc.append(y)
                y = double(y)
            seen.update(cyc)
            if not _rotates(cyc):
                continue
            pts = sorted(cyc)
            edge = Chord(pts[0], pts[1])
            out.append(portrait_from_chord(edge))
    return out


_PRINCIPAL_CACHE: dict[int, list[OrbitPortrait]] = {}


def principal_coexisting(P: OrbitPortrait, period_bound: int) -> OrbitPortrait:
    if period_bound not in _PRINCIPAL_CACHE:
        _PRINCIPAL_CACHE[period_bound] = principal_portraits(period_bound)
    found = [G for G in _PRINCIPAL_CACHE[period_bound] if coexist(P, G)]
    if not found:
        raise NotFound(f"no principal portrait of period <= {period_bound} co-exists")
    if len(found) > 1:
        raise MultipleFound(
            "co-existing principal portraits: " + "; ".join(" ".join(map(str, G.chords)) for G in found)
        )
    return found[0]


def _int_cycle(a: int, b: int, q: int) -> Optional[list[tuple[int, int]]]:
    """Forward cycle of the chord {a/q, b/q} (q odd) if it is unlinked."""
    start = (a, b) if a < b else (b, a)
    lo, hi = start
    cycle = [start]
    x, y = (2 * a) % q, (2 * b) % q
    while True:
        c = (x, y) if x < y else (y, x)
        if c == start:
            break
        # cheap rejection: every image must stay unlinked from the first chord
        if x != a and x != b and y != a and y != b and (lo < x < hi) != (lo < y < hi):
            return None
        cycle.append(c)
        x, y = (2 * x) % q, (2 * y) % q
    # unlinked iff closing endpoints always match the innermost open chord
    events = sorted([(c[0], 1, -c[1], i) for i, c in enumerate(cycle)]
                    + [(c[1], 0, -c[0], i) for i, c in enumerate(cycle)])
    stack: list[int] = []
    for pos, opening, _, i in events:
        if opening:
            stack.append(i)
        else:
            if stack[-1] != i:
                return None
            stack.pop()
    return cycle


def portraits_up_to(max_denominator: int) -> list[OrbitPortrait]:
    """Every distinct orbit portrait generated by a chord whose endpoints are
    periodic angles with denominators at most the bound."""
    pts = sorted({Angle(a, q) for q in range(1, max_denominator + 1, 2) for a in range(q)})
    pts = [(x.numerator, x.denominator) for x in pts if not orbit_info(x).preperiod]
    covered: set[tuple[int, int, int]] = set()
    out = []
    for i, (xn, xd) in enumerate(pts):
        for yn, yd in pts[i + 1:]:
            q = xd * yd // gcd(xd, yd)
            a, b = xn * (q // xd), yn * (q // yd)
            if (a, b, q) in covered:
                continue
            cyc = _int_cycle(a, b, q)
            if cyc is None:
                continue
            covered.update((u, v, q) for u, v in cyc)
            out.append(OrbitPortrait(tuple(Chord(Angle(u, q), Angle(v, q)) for u, v in cyc)))
    return out


def try_portrait(c: Chord) -> Optional[OrbitPortrait]:
    try:
        return portrait_from_chord(c)
    except (Crossing, NotPeriodic):
        return None

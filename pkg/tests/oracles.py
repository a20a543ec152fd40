"""Independent reference implementations used by the tests.

Nothing here imports the package; each routine recomputes its answer by a
different, more naive route.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

F = Fraction


def dbl(x: Fraction) -> Fraction:
    return (2 * x) % 1


def norm(a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    a, b = a % 1, b % 1
    return (a, b) if a <= b else (b, a)


def linked(c1, c2) -> bool:
    """Brute-force crossing test: exactly one endpoint of c2 lies strictly
    between the endpoints of c1, and no endpoints are shared."""
    (a, b), (c, d) = norm(*c1), norm(*c2)
    if len({a, b, c, d}) < 4:
        return False
    return (a < c < b) != (a < d < b)


def naive_orbit(x: Fraction, limit: int = 10_000) -> tuple[int, int]:
    """(preperiod, period) by storing every iterate."""
    seen = {}
    i = 0
    while x not in seen:
        seen[x] = i
        x = dbl(x)
        i += 1
        if i > limit:
            raise RuntimeError("orbit too long")
    return seen[x], i - seen[x]


def basilica_subdivision(min_length: Fraction) -> set[tuple[Fraction, Fraction]]:
    """Chords of the z^2 - 1 lamination by repeated quarter subdivision.

    Start from {1/3, 2/3} and its half-turn {5/6, 1/6}. In every boundary arc
    [s, e] join the points at one quarter and three quarters, which splits
    the arc into three; recurse while the new chord is at least
    ``min_length`` long (chord length shrinks down the recursion).
    """
    chords = {norm(F(1, 3), F(2, 3)), norm(F(5, 6), F(1, 6))}
    pts = [F(1, 6), F(1, 3), F(2, 3), F(5, 6)]
    arcs = [(pts[i], pts[(i + 1) % 4]) for i in range(4)]
    while arcs:
        nxt = []
        for s, e in arcs:
            length = (e - s) % 1
            u, v = s + length / 4, s + 3 * length / 4
            if length / 2 < min_length:
                continue
            chords.add(norm(u, v))
            nxt += [(s, u % 1), (u % 1, v % 1), (v % 1, e)]
        arcs = nxt
    return chords


def chord_generation(c, target, limit: int = 64):
    """Least n with the n-th image of c equal to target, or None."""
    cur = norm(*c)
    for n in range(limit + 1):
        if cur == target:
            return n
        a, b = dbl(cur[0]), dbl(cur[1])
        if a == b:
            return None
        cur = norm(a, b)
    return None


def exists_crossing(chords) -> bool:
    return any(linked(c, d) for c, d in combinations(list(chords), 2))


def naive_pullbacks(theta: Fraction, depth: int):
    """Leaves of the critical-leaf lamination by explicit pullback.

    Generation 0 is the diameter joining the halves of theta. A leaf of the
    next generation is one of the two preimage pairings of a current leaf;
    the pairing is kept when none of its chords crosses the diameter. Leaves
    are (a, b) tuples. Returns None if both pairings qualify somewhere.
    """
    h = theta / 2
    crit = norm(h, h + F(1, 2))
    leaves = {crit}
    frontier = {crit}
    for _ in range(depth):
        nxt = set()
        for a, b in frontier:
            a1, a2 = a / 2, a / 2 + F(1, 2)
            b1, b2 = b / 2, b / 2 + F(1, 2)
            ok = []
            for pair in (((a1, b1), (a2, b2)), ((a1, b2), (a2, b1))):
                if not any(linked(p, crit) for p in pair):
                    ok.append(pair)
            if len(ok) != 1:
                return None
            for p in ok[0]:
                c = norm(*p)
                if c[0] != c[1] and c not in leaves:
                    nxt.add(c)
        leaves |= nxt
        frontier = nxt
    return leaves

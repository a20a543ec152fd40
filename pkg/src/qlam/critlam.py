"""Critical-leaf laminations: pullbacks of a critical diameter, caterpillars,
cleaning, the central gap and a non-recurrence certificate.

The pullback tree is computed on integer numerators over the common
denominator ``q * 2**(depth + 1)`` (``q`` the denominator of theta) so that
the inner loop never touches :class:`~fractions.Fraction`.

Limit leaves never appear in a finite pullback truncation. They are produced
separately by :func:`model_lamination`, which builds the equivalence classes
of the clean lamination from itineraries relative to the critical partition
and pulls those classes back generation by generation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional, Sequence

from .chords import AmbiguousPairing, Chord, chord_length, critical_chord, crosses, image_n, sibling_preimages
from .circle import (
    HALF,
    Angle,
    AngleLike,
    angle,
    double,
    halves,
    in_open_arc,
    is_periodic,
    iterate,
    orbit_info,
)
from .lamination import Face, Lamination, face_of_vertices, faces
from .symbolic import Partition, fixed_points, preperiodic_class

PERIODIC_ENDPOINT = "PeriodicEndpoint"
FINITE_CRITICAL_GAP = "FiniteCriticalGap"
PLAIN = "Plain"


class NotFound(LookupError):
    pass


class Ambiguous(LookupError):
    pass


@dataclass(frozen=True)
class CriticalLeafLamination:
    theta: Angle
    depth: int
    critical_leaf: Chord
    pullback_leaves: Lamination
    case_tag: str

    @property
    def leaves(self) -> frozenset[Chord]:
        return self.pullback_leaves.leaves


@dataclass(frozen=True)
class Caterpillar:
    chain: tuple[Chord, ...]
    limit_leaf: Optional[Chord]


@dataclass(frozen=True)
class NonRecurrence:
    """Outcome of :func:`check_nonrecurrent`; truthy when the check passed."""

    holds: bool
    horizon: int
    first_return: Optional[int] = None

    def __bool__(self) -> bool:
        return self.holds


# -- case analysis -------------------------------------------------------------

def periodic_half(theta: AngleLike) -> Optional[Angle]:
    """The endpoint of the critical leaf lying on the cycle of theta, if any."""
    theta = angle(theta)
    if not is_periodic(theta):
        return None
    n = orbit_info(theta).period
    return iterate(theta, n - 1)


def critical_value_class(theta: AngleLike) -> list[Angle]:
    """Angles identified with theta in the clean lamination (theta not periodic)."""
    theta = angle(theta)
    part = Partition.from_groups([halves(theta)])
    return preperiodic_class(part, theta)


def case_of(theta: AngleLike) -> str:
    theta = angle(theta)
    if is_periodic(theta):
        return PERIODIC_ENDPOINT
    if len(critical_value_class(theta)) > 1:
        return FINITE_CRITICAL_GAP
    return PLAIN


def critical_major(theta: AngleLike) -> Chord:
    """The periodic leaf M joining the periodic endpoint p of the critical leaf
    to the limit of the caterpillar.

    Candidates are the points fixed by ``n``-fold doubling (``n`` the period
    of p) that follow the same closed half-circle itinerary as p; among those
    whose orbit leaf cycle is unlinked and never crosses the critical leaf the
    longest is taken. Returns the degenerate chord ``{p, p}`` when there is no
    candidate (theta = 0).
    """
    theta = angle(theta)
    p = periodic_half(theta)
    if p is None:
        raise ValueError(f"{theta} is not periodic")
    l0 = critical_chord(theta)
    info = orbit_info(p)
    n = info.period
    part = Partition.from_groups([halves(theta)])
    choices = [part.arc_index_closed(y) for y in info.orbit]
    cands: set[Angle] = set()
    for word in product(*choices):
        cands.update(fixed_points(part, list(word)))
    cands.discard(p)
    good = [q for q in cands if _cycle_ok(Chord(p, q), l0, n)]
    if not good:
        return Chord(p, p)
    q = max(sorted(good), key=lambda x: chord_length(Chord(p, x)))
    return Chord(p, q)


def _cycle_ok(m: Chord, l0: Chord, n: int) -> bool:
    orbit = [image_n(m, i) for i in range(n)]
    for i, c in enumerate(orbit):
        if crosses(c, l0):
            return False
        if any(crosses(c, d) for d in orbit[:i]):
            return False
    return True


def critical_partition(theta: AngleLike) -> Partition:
    """Wall groups cutting the circle into arcs where doubling is injective."""
    theta = angle(theta)
    case = case_of(theta)
    if case == PERIODIC_ENDPOINT:
        m = critical_major(theta)
        return Partition.from_groups([m.endpoints, (m.a + HALF, m.b + HALF)])
    if case == FINITE_CRITICAL_GAP:
        return Partition.from_groups([[h for x in critical_value_class(theta) for h in halves(x)]])
    return Partition.from_groups([halves(theta)])


# -- pullbacks -------------------------------------------------------------------

def pullback_pair(c: Chord, theta: AngleLike) -> tuple[Chord, Chord]:
    """The two preimages of ``c`` kept in the pullback tree of the critical leaf.

    Normally this is the unique pairing avoiding the critical leaf. When ``c``
    ends at theta both pairings avoid it; the tie is broken by nudging theta
    into the shorter arc cut off by ``c`` and taking the limit of the
    unambiguous pullbacks.
    """
    theta = angle(theta)
    l0 = critical_chord(theta)
    try:
        return sibling_preimages(c, l0)
    except AmbiguousPairing:
        if theta not in c:
            raise
    y = c.other(theta)
    if y == theta + HALF or y == theta - HALF:
        raise AmbiguousPairing(f"{c} is a diameter through theta")
    forward = in_open_arc(y, theta, theta + HALF)
    out = []
    for e in l0.endpoints:
        s, t = (e, e + HALF) if forward else (e - HALF, e)
        out.extend(Chord(e, yh) for yh in halves(y) if in_open_arc(yh, s % 1, t % 1))
    first, second = sorted(out)
    return first, second


def _int_pullbacks(theta: Angle, depth: int) -> tuple[int, dict[tuple[int, int], int]]:
    """Pullback tree on numerators over ``N = q * 2**(depth+1)``."""
    q = theta.denominator
    N = q << (depth + 1)
    half = N >> 1
    t = theta.numerator << (depth + 1)
    h0 = t >> 1
    walls = (h0, h0 + half)

    def side(x: int) -> int:
        if x in walls:
            return 0
        return 1 if (x - h0) % N < half else -1

    def ok(x: int, y: int) -> bool:
        sx, sy = side(x), side(y)
        return sx == 0 or sy == 0 or sx == sy

    def pull(u: int, v: int) -> list[tuple[int, int]]:
        a1, b1 = u >> 1, v >> 1
        a2, b2 = a1 + half, b1 + half
        good = [pr for pr in (((a1, b1), (a2, b2)), ((a1, b2), (a2, b1)))
                if ok(*pr[0]) and ok(*pr[1])]
        if len(good) == 1:
            return list(good[0])
        # the chord ends at theta: nudge theta into the shorter side of it
        y = v if u == t else u
        forward = 0 < (y - t) % N < half
        out = []
        for e in walls:
            for yh in (y >> 1, (y >> 1) + half):
                d = (yh - e) % N
                if (0 < d < half) if forward else (d > half):
                    out.append((e, yh))
        return out

    l0 = tuple(sorted(walls))
    gen = {l0: 0}
    front = [l0]
    for g in range(1, depth + 1):
        nxt = []
        for u, v in front:
            for x, y in pull(u, v):
                key = (x, y) if x < y else (y, x)
                if key not in gen:
                    gen[key] = g
                    nxt.append(key)
        front = nxt
    return N, gen


def build_critical_lamination(theta: AngleLike, depth: int) -> CriticalLeafLamination:
    """The critical leaf plus its pullbacks of generation at most ``depth``."""
    theta = angle(theta)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    N, gen = _int_pullbacks(theta, depth)
    generation = {Chord(Fraction(x, N), Fraction(y, N)): g for (x, y), g in gen.items()}
    case = case_of(theta)
    lam = Lamination(frozenset(generation), theta=theta, depth=depth, case=case, generation=generation)
    return CriticalLeafLamination(theta, depth, critical_chord(theta), lam, case)


# -- caterpillars --------------------------------------------------------------------

def detect_caterpillar(L: CriticalLeafLamination) -> Optional[Caterpillar]:
    """The endpoint-sharing chain from the critical leaf toward the major leaf.

    Each link is the leaf at the free end of the previous one that maps onto
    it under the period of the periodic endpoint.
    """
    p = periodic_half(L.theta)
    if p is None:
        return None
    n = orbit_info(p).period
    by_point: dict[Angle, list[Chord]] = {}
    for c in L.leaves:
        for x in c.endpoints:
            by_point.setdefault(x, []).append(c)
    chain = [L.critical_leaf]
    free = L.critical_leaf.other(p)
    while True:
        nxt = sorted(c for c in by_point.get(free, ()) if c != chain[-1] and image_n(c, n) == chain[-1])
        if not nxt:
            break
        chain.append(nxt[0])
        free = nxt[0].other(free)
    m = critical_major(L.theta)
    return Caterpillar(tuple(chain), None if m.degenerate else m)


# -- the clean lamination as equivalence classes ---------------------------------------

def _hull_edges(points: Sequence[Angle]) -> list[Chord]:
    pts = sorted(points)
    if len(pts) < 2:
        return []
    if len(pts) == 2:
        return [Chord(*pts)]
    return [Chord(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]


def _class_period(cls: Sequence[Angle]) -> int:
    start = frozenset(cls)
    cur, k = frozenset(double(x) for x in start), 1
    while cur != start:
        cur, k = frozenset(double(x) for x in cur), k + 1
    return k


def _periodic_classes(part: Partition, max_period: int) -> list[tuple[Angle, ...]]:
    """Multi-point classes of periodic angles of period at most ``max_period``
    whose orbits avoid the walls."""
    walls = set(part.points)
    groups: dict[tuple, list[Angle]] = {}
    for orbit in _periodic_orbits(max_period):
        if walls.intersection(orbit):
            continue
        key = tuple(part.symbol(y) for y in orbit)
        groups.setdefault(key, []).append(orbit[0])
    return [tuple(sorted(g)) for g in groups.values() if len(g) > 1]


@lru_cache(maxsize=None)
def _periodic_orbits(max_period: int) -> tuple[tuple[Angle, ...], ...]:
    out = []
    for k in range(1, max_period + 1):
        den = (1 << k) - 1
        for j in range(den):
            info = orbit_info(Fraction(j, den))
            if info.period == k:
                out.append(tuple(info.orbit))
    return tuple(out)


def _orbit_components(leaves: Iterable[Chord]) -> list[tuple[Angle, ...]]:
    parent: dict[Angle, Angle] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in leaves:
        parent[find(c.a)] = find(c.b)
    comps: dict[Angle, list[Angle]] = {}
    for x in list(parent):
        comps.setdefault(find(x), []).append(x)
    return [tuple(sorted(v)) for v in comps.values()]


def class_preimages(part: Partition, value_class: frozenset[Angle], cls: Sequence[Angle]) -> list[tuple[Angle, ...]]:
    """Split the full preimage of a class into the classes mapping onto it.

    ``value_class`` is the class of theta when the critical gap is finite: its
    preimage is the single critical class.
    """
    pre = sorted(h for x in cls for h in halves(x))
    if frozenset(cls) == value_class:
        return [tuple(pre)]
    target = set(cls)
    found: list[frozenset] = []
    where = {x: part.arc_index_closed(x) for x in pre}
    for j in range(len(part.arcs())):
        d = tuple(x for x in pre if j in where[x])
        if len(d) != len(cls) or {double(x) for x in d} != target:
            continue
        if len({part.group_of(x) for x in d} - {None}) > 1:
            continue
        rest = tuple(x for x in pre if x not in d)
        split = frozenset([d, rest])
        if split not in found:
            found.append(split)
    if len(found) != 1:
        raise Ambiguous(f"class {[str(x) for x in cls]} splits in {len(found)} ways")
    return sorted(found[0])


def model_classes(theta: AngleLike, depth: int) -> dict[tuple[Angle, ...], int]:
    """Multi-point classes of the clean lamination with their generation.

    A cycle of ``k`` periodic classes (the cycle of the major leaf among
    them) enters at generation ``k - 1``. The critical polygon and the
    forward images of its image are generation 0. Each further generation is the
    set of preimage classes of the previous one.
    """
    theta = angle(theta)
    case = case_of(theta)
    part = critical_partition(theta)
    value_class: frozenset[Angle] = frozenset()
    seeds: list[tuple[tuple[Angle, ...], int]] = []
    periodic = _periodic_classes(part, depth)
    if case == PERIODIC_ENDPOINT:
        m = critical_major(theta)
        if not m.degenerate:
            n = orbit_info(m.a).period
            periodic.extend(_orbit_components(image_n(m, i) for i in range(n)))
    elif case == FINITE_CRITICAL_GAP:
        vc = tuple(critical_value_class(theta))
        value_class = frozenset(vc)
        seeds.append((tuple(sorted(h for x in vc for h in halves(x))), 0))
        seen: set[tuple[Angle, ...]] = set()
        while vc not in seen:
            seen.add(vc)
            seeds.append((vc, 0))
            vc = tuple(sorted({double(x) for x in vc}))
    else:
        value_class = frozenset([theta])
        seeds.append((tuple(sorted(halves(theta))), 0))
    seeds.extend((c, _class_period(c) - 1) for c in periodic)
    entering: dict[int, list[tuple[Angle, ...]]] = {}
    for cls, g in seeds:
        if len(cls) > 1:
            entering.setdefault(g, []).append(cls)
    gen: dict[tuple[Angle, ...], int] = {}
    front: list[tuple[Angle, ...]] = []
    for g in range(depth + 1):
        if g:
            nxt = []
            for cls in front:
                for pc in class_preimages(part, value_class, cls):
                    if len(pc) > 1 and pc not in gen:
                        gen[pc] = g
                        nxt.append(pc)
            front = nxt
        for cls in entering.get(g, ()):
            if cls not in gen:
                gen[cls] = g
                front.append(cls)
    return gen


def model_lamination(theta: AngleLike, depth: int) -> Lamination:
    """Clean lamination of theta: hull edges of its classes to ``depth``
    generations of pullback, limit leaves included."""
    theta = angle(theta)
    generation: dict[Chord, int] = {}
    for cls, g in model_classes(theta, depth).items():
        for c in _hull_edges(cls):
            if generation.get(c, g + 1) > g:
                generation[c] = g
    return Lamination(frozenset(generation), theta=theta, depth=depth, case=case_of(theta), generation=generation)


def clean(L: CriticalLeafLamination) -> Lamination:
    """Remove the caterpillar (or the critical leaf) together with all of its
    pullbacks, keeping the limit leaves.

    Every leaf of a finite truncation is a pullback of the critical leaf, so in
    the two unclean cases what remains is exactly the set of limit leaves,
    which :func:`model_lamination` supplies. Already clean laminations are
    returned unchanged.
    """
    if L.case_tag == PLAIN:
        return L.pullback_leaves
    return model_lamination(L.theta, L.depth)


# -- central gap and recurrence ---------------------------------------------------------------

def _is_rotation(vertices: Sequence[Angle]) -> bool:
    vs = sorted(vertices)
    images = [double(x) for x in vs]
    if set(images) != set(vs):
        return False
    shift = vs.index(images[0])
    return all(images[i] == vs[(i + shift) % len(vs)] for i in range(len(vs)))


def central_gap(lam: Lamination | Iterable[Chord]) -> Face:
    """The unique finite gap or leaf whose vertices doubling rotates."""
    leaves = lam.leaves if isinstance(lam, Lamination) else frozenset(lam)
    cands: dict[frozenset, Face] = {}
    for c in leaves:
        if _is_rotation(c.endpoints):
            cands[frozenset(c.endpoints)] = face_of_vertices(c.endpoints)
    if leaves:
        for f in faces(leaves):
            if f.finite_type and _is_rotation(f.vertices):
                cands[f.vertex_set] = f
    if not cands:
        raise NotFound("no invariant finite gap or leaf at this depth")
    if len(cands) > 1:
        raise Ambiguous(f"{len(cands)} invariant candidates")
    return next(iter(cands.values()))


def critical_vertices(theta: AngleLike) -> tuple[Angle, ...]:
    """Vertices of the critical leaf, critical polygon, or the critical gap's
    boundary leaves ``M`` and ``M + 1/2``."""
    theta = angle(theta)
    case = case_of(theta)
    if case == FINITE_CRITICAL_GAP:
        return tuple(sorted(h for x in critical_value_class(theta) for h in halves(x)))
    if case == PERIODIC_ENDPOINT:
        m = critical_major(theta)
        return tuple(sorted({m.a, m.b, m.a + HALF, (m.b + HALF) % 1}))
    return tuple(sorted(halves(theta)))


def check_nonrecurrent(L: CriticalLeafLamination, horizon: int) -> NonRecurrence:
    """Finite certificate that the critical leaf or gap never comes back.

    A critical leaf or finite critical gap passes when no image of its vertex
    set within ``horizon`` steps meets the vertex set again. A periodic
    critical gap passes when its boundary leaf ``M`` is carried exactly back
    onto itself (a periodic gap is not recurrent).
    """
    if horizon <= 0:
        return NonRecurrence(True, max(horizon, 0))
    if L.case_tag == PERIODIC_ENDPOINT:
        m = critical_major(L.theta)
        if m.degenerate:
            return NonRecurrence(True, horizon)
        n = orbit_info(m.a).period
        return NonRecurrence(image_n(m, n) == m, horizon, n if n <= horizon else None)
    vs = set(critical_vertices(L.theta))
    cur = set(vs)
    for i in range(1, horizon + 1):
        cur = {double(x) for x in cur}
        if cur & vs:
            return NonRecurrence(False, horizon, i)
    return NonRecurrence(True, horizon)

"""Matings of two laminations: joint equivalence classes, obstruction tests,
and the collapse of a critical gap onto the circle of internal angles.

The outer lamination is stored as given and reflected on the fly: an outer
leaf ``{a, b}`` joins the common-circle angles ``-a`` and ``-b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lcm
from fractions import Fraction
from typing import Iterable, Optional

from .chords import Chord, chord_conjugate, chord_length, image_n, opposite
from .circle import HALF, ZERO, Angle, conjugate, format_angle, in_closed_arc, in_open_arc, iterate, orbit_info
from .critlam import Ambiguous, NotFound, central_gap
from .lamination import DisjointSets, Face, Lamination, dumps, faces, leaf_classes, loads, sort_angles


class NotVertex(ValueError):
    pass


class NoRoute(LookupError):
    pass


class DepthInsufficient(ValueError):
    pass


class MatingFormatError(ValueError):
    pass


# -- critical gap and the collapse map ---------------------------------------------------

def _behind_arc(face: Face, e: Chord) -> tuple[Angle, Angle]:
    """The ccw arc cut off by the edge ``e`` on the side away from the face."""
    a, b = e.a, e.b
    others = [v for v in face.vertices if v != a and v != b]
    if any(in_open_arc(v, a, b) for v in others) or (a, b) in face.holes:
        return b, a
    if any(in_open_arc(v, b, a) for v in others) or (b, a) in face.holes:
        return a, b
    # a lone leaf without holes; either side will do
    return (a, b) if b - a <= HALF else (b, a)


def critical_gap(lam: Lamination | Iterable[Chord]) -> Face:
    """The face containing the center of the disk.

    Raises NotFound when the center lies on a leaf (a diameter) or the face
    has no edges.
    """
    leaves = lam.leaves if isinstance(lam, Lamination) else frozenset(lam)
    if any(chord_length(c) == HALF for c in leaves):
        raise NotFound("the center lies on a diameter")
    for f in faces(leaves):
        if not f.edges:
            continue
        if all(arc_len < HALF for arc_len in (((y - x) % 1) for x, y in (_behind_arc(f, e) for e in f.edges))):
            return f
    raise NotFound("no gap contains the center")


def major_leaf(L: Lamination, k: int, gap: Optional[Face] = None) -> Chord:
    """Longest edge of the critical gap fixed by the k-th iterate whose
    opposite chord is also an edge."""
    G = gap if gap is not None else critical_gap(L)
    edges = set(G.edges)
    cands = [e for e in G.edges if image_n(e, k) == e and opposite(e) in edges]
    if not cands:
        raise NotFound(f"no edge of the critical gap is fixed by {k} doublings")
    return max(cands, key=lambda e: (chord_length(e), e.a))


def _short_side(m: Chord) -> tuple[Angle, Angle]:
    return (m.a, m.b) if m.b - m.a < HALF else (m.b, m.a)


def _expansion(digits: list[int], tail: Optional[Angle], loop_start: Optional[int]) -> Angle:
    """Exact value of a binary itinerary: finite with a tail value, or with the
    digits from ``loop_start`` on repeating forever."""
    if loop_start is None:
        val = Fraction(0)
        for i, d in enumerate(digits):
            val += Fraction(d, 2 ** (i + 1))
        return (val + tail / 2 ** len(digits)) % 1
    head, block = digits[:loop_start], digits[loop_start:]
    val = Fraction(0)
    for i, d in enumerate(head):
        val += Fraction(d, 2 ** (i + 1))
    num = 0
    for d in block:
        num = 2 * num + d
    val += Fraction(num, (2 ** len(block) - 1) * 2 ** len(head))
    return val % 1


@dataclass(frozen=True)
class CollapseMap:
    """Monotone collapse of the circle fixing the major leaf at 0.

    Points in the closed hole behind ``major`` go to 0, the opposite hole to
    1/2; elsewhere the binary digits record on which side of the pair
    ``major, -major`` the k-th iterates fall.
    """

    gap: Face
    major: Chord
    k: int

    def _walk(self, x: Angle) -> tuple[list[int], Optional[Angle], Optional[int], bool]:
        a, b = _short_side(self.major)
        a2, b2 = (a + HALF) % 1, (b + HALF) % 1
        digits: list[int] = []
        seen: dict[Angle, int] = {}
        on_basis = True
        while x not in seen:
            seen[x] = len(digits)
            if in_closed_arc(x, a, b):
                return digits, ZERO, None, on_basis and x in (a, b)
            if in_closed_arc(x, a2, b2):
                return digits, HALF, None, on_basis and x in (a2, b2)
            digits.append(0 if in_open_arc(x, b, a2) else 1)
            x = iterate(x, self.k)
        return digits, None, seen[x], on_basis

    def xi(self, x: Angle) -> Angle:
        digits, tail, loop, _ = self._walk(Fraction(x) % 1)
        return _expansion(digits, tail, loop)

    def in_basis(self, x: Angle) -> bool:
        """True unless some iterate falls strictly inside a collapsed hole."""
        return self._walk(Fraction(x) % 1)[3]

    @property
    def vertex_to_internal(self) -> tuple[tuple[Angle, Angle], ...]:
        return tuple((v, self.xi(v)) for v in self.gap.vertices)


def collapse_map(L: Lamination, k: int, conjugated: bool = False) -> CollapseMap:
    """Collapse map of the critical gap of L (or of its mirror image)."""
    G = critical_gap(L)
    M = major_leaf(L, k, G)
    if conjugated:
        G = Face(
            tuple(sort_angles(conjugate(v) for v in G.vertices)),
            tuple(sorted(chord_conjugate(e) for e in G.edges)),
            tuple(sorted((conjugate(e), conjugate(s)) for s, e in G.holes)),
        )
        M = chord_conjugate(M)
    return CollapseMap(G, M, k)


def internal_angle(L: Lamination, k: int, vertex: Angle) -> Angle:
    C = collapse_map(L, k)
    if vertex not in C.gap.vertex_set:
        raise NotVertex(f"{format_angle(vertex)} is not a vertex of the critical gap")
    return C.xi(vertex)


def external_to_internal(L: Lamination, component: Face, k: int, theta: Angle) -> Angle:
    """Internal angle of the boundary point of a preimage component at the
    external angle theta, through the first iterate landing on the critical gap."""
    if theta not in component.vertex_set:
        raise NotVertex(f"{format_angle(theta)} is not a vertex of the component")
    C = collapse_map(L, k)
    target = C.gap.vertex_set
    horizon = (L.depth or 0) + k + 1
    for m in range(horizon + 1):
        if all(iterate(v, m) in target for v in component.vertices):
            return C.xi(iterate(theta, m))
    raise NoRoute(f"component does not reach the critical gap within {horizon} doublings")


def collapse_lamination(Louter: Lamination, C: CollapseMap) -> Lamination:
    """Images under the collapse of the outer leaves joining two points of the
    gap's basis; leaves that collapse to a point are dropped."""
    out = set()
    for c in Louter.leaves:
        if C.in_basis(c.a) and C.in_basis(c.b):
            img = Chord(C.xi(c.a), C.xi(c.b))
            if not img.degenerate:
                out.add(img)
    return Lamination(frozenset(out), depth=Louter.depth)


def mating_triviality_check(LG: Lamination) -> bool:
    return not any(not c.degenerate for c in LG.leaves)


# -- the mating model ------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _pieces(L: Lamination) -> tuple[tuple[Angle, ...], ...]:
    return tuple(c for c in leaf_classes(L.leaves) if len(c) > 1)


@lru_cache(maxsize=512)
def _central(L: Lamination) -> Face:
    return central_gap(L)


def _common_den(*lams: Lamination) -> int:
    return lcm(1, *{x.denominator for L in lams for c in L.leaves for x in c.endpoints})


def _ints(points: Iterable[Angle], D: int, reflect: bool = False) -> list[int]:
    out = [x.numerator * (D // x.denominator) for x in points]
    return [(-n) % D for n in out] if reflect else out


@dataclass(frozen=True)
class MatingModel:
    inner: Lamination
    outer: Lamination
    classes: tuple[tuple[Angle, ...], ...]

    def __post_init__(self):
        idx = {x: i for i, cls in enumerate(self.classes) for x in cls}
        object.__setattr__(self, "_index", idx)

    def class_of(self, x: Angle) -> tuple[Angle, ...]:
        return self.classes[self._index[x]]

    @property
    def reflected_outer(self) -> list[Chord]:
        return sorted(chord_conjugate(c) for c in self.outer.leaves)

    def inner_pieces(self) -> list[tuple[Angle, ...]]:
        return list(_pieces(self.inner))

    def outer_pieces(self) -> list[tuple[Angle, ...]]:
        """Classes of the outer lamination alone, in common coordinates."""
        return sorted(tuple(sort_angles(conjugate(x) for x in p)) for p in _pieces(self.outer))

    def dumps(self) -> str:
        lines = ["# mating"]
        lines += dumps(self.inner, "inner").splitlines()
        lines += dumps(self.outer, "outer").splitlines()
        for cls in self.classes:
            if len(cls) > 1:
                lines.append("class: " + " ".join(format_angle(x) for x in cls))
        return "\n".join(lines) + "\n"


def build_mating(L1: Lamination, L2: Lamination) -> MatingModel:
    """Join the two laminations on a common circle. Computed on integer
    numerators over a common denominator, which doubling preserves."""
    D = _common_den(L1, L2)
    ds = DisjointSets()
    for p in _pieces(L1):
        ns = _ints(p, D)
        for n in ns[1:]:
            ds.union(ns[0], n)
    for p in _pieces(L2):
        ns = _ints(p, D, reflect=True)
        for n in ns[1:]:
            ds.union(ns[0], n)
    seen: set[int] = set()
    for n in list(ds.parent):
        while n not in seen:
            seen.add(n)
            ds.add(n)
            n = 2 * n % D
    groups = sorted(sorted(g) for g in ds.groups())
    classes = [tuple(Fraction(n, D) for n in g) for g in groups]
    return MatingModel(L1, L2, tuple(classes))


def loads_mating(text: str) -> MatingModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "# mating":
        raise MatingFormatError("missing '# mating' header")
    blocks: dict[str, list[str]] = {"inner": [], "outer": []}
    cur = None
    for ln in lines[1:]:
        if ln.startswith("# inner"):
            cur = "inner"
        elif ln.startswith("# outer"):
            cur = "outer"
        elif ln.startswith("class:"):
            cur = None
            continue
        elif cur is None:
            raise MatingFormatError(f"unexpected line {ln!r}")
        blocks[cur].append(ln)
    return build_mating(loads("\n".join(blocks["inner"]), "inner"), loads("\n".join(blocks["outer"]), "outer"))


# -- obstruction ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class ObstructionReport:
    period_bound: int
    conjugate_leaf: Optional[Chord]
    loop_class: Optional[tuple[Angle, ...]]
    separation: bool

    @property
    def verdicts(self) -> tuple[bool, bool, bool]:
        return self.conjugate_leaf is not None, self.loop_class is not None, self.separation

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts)) == 1

    @property
    def obstructed(self) -> bool:
        if not self.agree:
            raise AssertionError(f"obstruction sub-tests disagree: {self.verdicts}")
        return self.verdicts[0]

    def dumps(self) -> str:
        yn = lambda b: "yes" if b else "no"
        leaf = f" {self.conjugate_leaf}" if self.conjugate_leaf is not None else ""
        loop = f" {' '.join(map(format_angle, self.loop_class))}" if self.loop_class else ""
        lines = [
            "# obstruction",
            f"period_bound={self.period_bound}",
            f"conjugate_leaf={yn(self.verdicts[0])}{leaf}",
            f"loop={yn(self.verdicts[1])}{loop}",
            f"separation={yn(self.separation)}",
            f"agree={yn(self.agree)}",
        ]
        if self.agree:
            lines.append(f"obstructed={yn(self.obstructed)}")
        return "\n".join(lines) + "\n"


def _piece_graph(M: MatingModel, D: int, skip: Optional[frozenset[int]] = None):
    """Union-find over angles (as integers over ``D``) and pieces, each piece
    joined to its members. Returns the structure and an angle at which a
    cycle first closed, if any. An outer piece equal to ``skip`` is left out.
    """
    ds = DisjointSets()
    loop = None
    sides = [(0, _ints(p, D)) for p in _pieces(M.inner)]
    sides += [(1, _ints(p, D, reflect=True)) for p in _pieces(M.outer)]
    for i, (tag, ns) in enumerate(sides):
        if tag and skip is not None and frozenset(ns) == skip:
            continue
        node = -1 - i
        for n in ns:
            if not ds.union(node, n) and loop is None:
                loop = n
    return ds, loop


def central_separation(M: MatingModel) -> bool:
    """Whether the vertices of the outer central gap stay connected through
    the other pieces once that gap's own piece is removed (so its class
    closes a loop around it)."""
    if not M.outer.leaves:
        return False
    try:
        C = _central(M.outer)
    except (NotFound, Ambiguous):
        return False
    D = _common_den(M.inner, M.outer)
    star = _ints(C.vertices, D, reflect=True)
    ds, _ = _piece_graph(M, D, skip=frozenset(star))
    root = ds.find(star[0])
    return any(ds.find(n) == root for n in star[1:])


def obstruction(M: MatingModel, period_bound: int) -> ObstructionReport:
    for L in (M.inner, M.outer):
        if L.leaves and L.depth is not None and L.depth < period_bound:
            raise DepthInsufficient(
                f"periodic leaves of period {period_bound} need depth >= {period_bound}, have {L.depth}"
            )
    inner = M.inner.leaves
    witness = None
    for c in sorted(c for c in M.outer.leaves if chord_conjugate(c) in inner):
        ia, ib = orbit_info(c.a), orbit_info(c.b)
        if ia.preperiod or ib.preperiod or max(ia.period, ib.period) > period_bound:
            continue
        witness = c
        break

    D = _common_den(M.inner, M.outer)
    _, loop = _piece_graph(M, D)
    loop_class = M.class_of(Fraction(loop, D)) if loop is not None else None

    separation = central_separation(M)
    return ObstructionReport(period_bound, witness, loop_class, separation)

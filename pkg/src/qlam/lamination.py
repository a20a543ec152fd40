"""Finite laminations: validation, faces, invariance and cleanliness."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import lcm
from typing import Iterable, Mapping, Optional

from .circle import HALF, Angle, format_angle, parse_angle
from .chords import Chord, image, parse_chord, preimage_pairings


class LaminationFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Lamination:
    """A finite set of pairwise unlinked, non-degenerate chords.

    ``generation`` optionally maps leaves to the pullback generation at which
    they were created; leaves at generation ``depth`` form the truncation
    frontier, whose preimages are legitimately missing.
    """

    leaves: frozenset[Chord] = frozenset()
    theta: Optional[Angle] = None
    depth: Optional[int] = None
    case: Optional[str] = None
    generation: Mapping[Chord, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "leaves", frozenset(c for c in self.leaves if not c.degenerate)
        )

    def __len__(self) -> int:
        return len(self.leaves)

    def __iter__(self):
        return iter(sorted(self.leaves))

    def __contains__(self, c: Chord) -> bool:
        return c in self.leaves or c.degenerate

    def vertices(self) -> list[Angle]:
        return sorted({x for c in self.leaves for x in c.endpoints})

    def with_leaves(self, leaves: Iterable[Chord], **meta) -> Lamination:
        kw = dict(theta=self.theta, depth=self.depth, case=self.case)
        kw.update(meta)
        return Lamination(frozenset(leaves), **kw)

    def interior(self) -> frozenset[Chord]:
        """Leaves strictly inside the truncation frontier."""
        if self.depth is None or not self.generation:
            return self.leaves
        return frozenset(c for c in self.leaves if self.generation.get(c, 0) < self.depth)


def validate(lam: Lamination | Iterable[Chord]) -> bool:
    return find_crossing(lam) is None


def find_crossing(lam: Lamination | Iterable[Chord]) -> Optional[tuple[Chord, Chord]]:
    """A crossing pair of leaves, or None.

    Sweeps endpoints in circular order keeping open chords on a stack;
    non-crossing chords close in last-in first-out order.
    """
    src = lam.leaves if isinstance(lam, Lamination) else lam
    leaves = list({c for c in src if not c.degenerate})
    if not leaves:
        return None
    # integer numerators over a common denominator keep the sweep cheap
    den = lcm(*{x.denominator for c in leaves for x in c.endpoints})
    keyed = [(c.a.numerator * (den // c.a.denominator), c.b.numerator * (den // c.b.denominator), c)
             for c in leaves]
    events: dict[int, tuple[list, list]] = {}
    for t in keyed:
        events.setdefault(t[0], ([], []))[1].append(t)
        events.setdefault(t[1], ([], []))[0].append(t)
    stack: list[tuple[int, int, Chord]] = []
    for x in sorted(events):
        closing, opening = events[x]
        # closings first (innermost = largest start), then openings (outermost first)
        closing.sort(key=lambda t: -t[0])
        opening.sort(key=lambda t: -t[1])
        for t in closing:
            if stack[-1] is not t:
                # the chord on top opened inside t and is still open: linked
                return stack[-1][2], t[2]
            stack.pop()
        stack.extend(opening)
    return None


@dataclass(frozen=True)
class Face:
    """Closure of a complementary region of a finite lamination.

    ``vertices`` are in counterclockwise order starting at the smallest angle;
    ``holes`` are the circle arcs ``(start, end)`` on the boundary, read ccw.
    """

    vertices: tuple[Angle, ...]
    edges: tuple[Chord, ...]
    holes: tuple[tuple[Angle, Angle], ...]

    @property
    def finite_type(self) -> bool:
        return not self.holes and len(self.vertices) >= 2

    @property
    def vertex_set(self) -> frozenset[Angle]:
        return frozenset(self.vertices)

    def __str__(self) -> str:
        return "face " + " ".join(format_angle(v) for v in self.vertices)


def face_of_vertices(vertices: Iterable[Angle]) -> Face:
    """The convex polygon (or single leaf) spanned by finitely many angles."""
    vs = tuple(sorted(set(vertices)))
    if len(vs) == 2:
        return Face(vs, (Chord(*vs),), ())
    edges = tuple(sorted({Chord(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))}))
    return Face(vs, edges, ())


def sort_angles(points: Iterable[Angle]) -> list[Angle]:
    """Sort angles through integer numerators over a common denominator."""
    pts = list(set(points))
    if not pts:
        return []
    den = lcm(*{x.denominator for x in pts})
    return sorted(pts, key=lambda x: x.numerator * (den // x.denominator))


def faces(lam: Lamination | Iterable[Chord], extra_points: Iterable[Angle] = ()) -> list[Face]:
    """All complementary faces of the chord arrangement inside the disk.

    ``extra_points`` adds marked circle points without leaves; they split
    holes but never create faces.
    """
    src = lam.leaves if isinstance(lam, Lamination) else lam
    leaves = [c for c in set(src) if not c.degenerate]
    pts = sort_angles({x for c in leaves for x in c.endpoints} | set(extra_points))
    n = len(pts)
    if not leaves:
        if not pts:
            return [Face((), (), ())]
        return [Face(tuple(pts), (), _merge_holes(pts, range(n), set()))]
    pos = {p: i for i, p in enumerate(pts)}
    incident: list[list[tuple[int, Chord]]] = [[] for _ in range(n)]
    for c in leaves:
        i, j = pos[c.a], pos[c.b]
        incident[i].append((j, c))
        incident[j].append((i, c))

    # darts out of w in rotational order: ccw arc, chords by ccw distance, cw arc;
    # a dart is (kind, source, label, target) with arcs labelled by their ccw start
    table: list[list[tuple]] = []
    index: dict[tuple, int] = {}
    for w in range(n):
        chords = sorted(incident[w], key=lambda t: (t[0] - w) % n)
        row = [(0, w, w, (w + 1) % n)] + [(1, w, c, j) for j, c in chords] + [(0, w, (w - 1) % n, (w - 1) % n)]
        table.append(row)
        for i, d in enumerate(row):
            index[d] = i
    used: set[tuple] = set()
    out: list[Face] = []
    for w in range(n):
        for start in table[w]:
            if start in used:
                continue
            cycle = []
            d = start
            while d not in used:
                used.add(d)
                cycle.append(d)
                kind, u, label, v = d
                d = table[v][index[(kind, v, label, u)] - 1]
            # the outer face is the circle traversed clockwise
            if all(x[0] == 0 and x[2] == x[3] for x in cycle):
                continue
            verts = tuple(pts[i] for i in sorted({x[1] for x in cycle}))
            edges = tuple(sorted({x[2] for x in cycle if x[0] == 1}))
            arcs = [x[2] for x in cycle if x[0] == 0]
            on_chords = {x[1] for x in cycle if x[0] == 1}
            out.append(Face(verts, edges, _merge_holes(pts, arcs, on_chords)))
    out.sort(key=lambda f: (f.vertices, f.edges))
    return out


def _merge_holes(pts, arcs, chord_points) -> tuple[tuple[Angle, Angle], ...]:
    """Join consecutive unit arcs (given by start index) meeting at a point
    that carries no face edge; return them as angle pairs."""
    n = len(pts)
    starts = set(arcs)
    if not starts:
        return ()
    heads = [a for a in starts if (a - 1) % n not in starts or a in chord_points]
    if not heads:
        # a single hole covering the whole circle
        return ((pts[0], pts[0]),)
    merged = []
    for a in heads:
        b = (a + 1) % n
        while b in starts and b not in chord_points and b != a:
            b = (b + 1) % n
        merged.append((pts[a], pts[b]))
    return tuple(sorted(merged))


def is_forward_invariant(lam: Lamination) -> bool:
    return all(image(c) in lam for c in lam.leaves)


def siblings(c: Chord) -> tuple[Chord, ...]:
    """Chords other than ``c`` with the same image."""
    a, b = c.endpoints
    cands = {Chord(a + HALF, b + HALF), Chord(a + HALF, b), Chord(a, b + HALF)}
    return tuple(sorted(x for x in cands if x != c and image(x) == image(c)))


def preimage_leaves(lam: Lamination, c: Chord) -> list[Chord]:
    return sorted({p for pair in preimage_pairings(c) for p in pair if p in lam.leaves})


def is_invariant(lam: Lamination) -> bool:
    """Forward invariance plus siblings, plus two preimages off the frontier."""
    if not is_forward_invariant(lam):
        return False
    interior = lam.interior()
    for c in lam.leaves:
        if not image(c).degenerate and not any(s in lam.leaves for s in siblings(c)):
            return False
        if c in interior and len(preimage_leaves(lam, c)) < 2:
            return False
    return True


def is_clean(lam: Lamination, face_list: Optional[list[Face]] = None) -> bool:
    """Leaves sharing an endpoint must both be edges of one finite face."""
    fs = face_list if face_list is not None else faces(lam)
    owner: dict[Chord, set[int]] = {}
    for i, f in enumerate(fs):
        if f.finite_type:
            for e in f.edges:
                owner.setdefault(e, set()).add(i)
    by_point: dict[Angle, list[Chord]] = {}
    for c in lam.leaves:
        by_point.setdefault(c.a, []).append(c)
        by_point.setdefault(c.b, []).append(c)
    for group in by_point.values():
        for c1, c2 in combinations(group, 2):
            if not owner.get(c1, set()) & owner.get(c2, set()):
                return False
    return True


# -- text format -------------------------------------------------------------

def _header(kind: str, lam: Lamination) -> str:
    theta = format_angle(lam.theta) if lam.theta is not None else "-"
    depth = str(lam.depth) if lam.depth is not None else "-"
    head = f"# {kind} theta={theta} depth={depth}"
    if lam.case:
        head += f" case={lam.case}"
    return head


def dumps(lam: Lamination, kind: str = "lamination") -> str:
    lines = sorted(str(c) for c in lam.leaves)
    return "\n".join([_header(kind, lam)] + lines) + "\n"


def parse_header(line: str, kind: str = "lamination") -> dict[str, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != "#" or parts[1] != kind:
        raise LaminationFormatError(f"bad header: {line!r}")
    meta = {}
    for p in parts[2:]:
        k, sep, v = p.partition("=")
        if not sep:
            raise LaminationFormatError(f"bad header field: {p!r}")
        meta[k] = v
    return meta


def loads(text: str, kind: str = "lamination") -> Lamination:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise LaminationFormatError("empty lamination file")
    meta = parse_header(lines[0], kind)
    theta = meta.get("theta", "-")
    depth = meta.get("depth", "-")
    try:
        leaves = frozenset(parse_chord(ln) for ln in lines[1:])
        return Lamination(
            leaves,
            theta=None if theta == "-" else parse_angle(theta),
            depth=None if depth == "-" else int(depth),
            case=meta.get("case"),
        )
    except ValueError as exc:
        raise LaminationFormatError(str(exc)) from exc


# -- equivalence classes -----------------------------------------------------

class DisjointSets:
    """Union-find with path halving over hashable items."""

    def __init__(self, items: Iterable = ()):
        self.parent: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        parent = self.parent
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x, y) -> bool:
        """Merge the sets of x and y; False if they were already merged."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[rx] = ry
        return True

    def groups(self) -> list[list]:
        out: dict = {}
        for x in list(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def leaf_classes(leaves: Iterable[Chord], points: Iterable[Angle] = ()) -> list[tuple[Angle, ...]]:
    """Classes of the equivalence generated by the leaves, as sorted tuples,
    ordered by least element. ``points`` adds singletons."""
    ds = DisjointSets(points)
    for c in leaves:
        ds.union(c.a, c.b)
    return sorted(tuple(sort_angles(g)) for g in ds.groups())

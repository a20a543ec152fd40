"""Captures: descriptors, end/cut classification, and the blow-up model.

A capture is described by a periodic angle (the polynomial lamination), a
strictly preperiodic Fatou gap ``V`` of that lamination and an external
angle ``theta`` on ``V``. The outer lamination of the associated mating is
the critical-leaf lamination of ``theta``; in common circle coordinates its
critical value sits at ``theta`` itself.

The blow-up model replaces every iterated preimage of ``theta`` by a pair of
marks ``a-``, ``a+``. Inner leaves at such a point attach to the side facing
away from the gap the arc is inserted into; every pullback ``{a, b}`` of the
critical chord turns into the two chords ``a+ b-`` and ``b+ a-``; any other
outer leaf ``{a, y}`` attaches to ``a+`` when ``y`` lies on the ccw arc from
``a`` to its partner ``b``, otherwise to ``a-``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .chords import Chord, chord_conjugate
from .circle import HALF, Angle, AngleLike, angle, double, format_angle, in_open_arc, is_periodic, iterate, period
from .critlam import NotFound, build_critical_lamination, central_gap, clean, model_lamination
from .lamination import Face, Lamination, faces
from .mating import (
    DepthInsufficient,
    NoRoute,
    _behind_arc,
    build_mating,
    central_separation,
    critical_gap,
    external_to_internal,
)
from .regluing import (
    CurveSystem,
    FiniteModel,
    Mark,
    from_mating,
    make_model,
    mark_image,
    preimages,
    pullback_curve_system,
    reglue,
)


class CaptureError(ValueError):
    pass


class PeriodicExternalAngle(CaptureError):
    """A periodic angle never lands on a strictly preperiodic Fatou gap."""


class ComponentNotFound(CaptureError):
    pass


class NotOnComponent(CaptureError):
    pass


class NotPeriodicPoly(CaptureError):
    pass


class AmbiguousSide(CaptureError):
    pass


class Inconclusive(CaptureError):
    pass


class CriterionDisagreement(AssertionError):
    pass


END = "EndCapture"
CUT = "CutCapture"
ZERO_HALF = "ZeroHalf"
HALF_ONE = "HalfOne"


# -- polynomial laminations and their gaps ----------------------------------------------------------

@lru_cache(maxsize=64)
def polynomial_lamination(poly_angle: Angle, depth: int) -> Lamination:
    return clean(build_critical_lamination(poly_angle, depth))


@lru_cache(maxsize=64)
def _face_data(L: Lamination) -> tuple[list[Face], dict[Angle, list[int]]]:
    fs = faces(L)
    at: dict[Angle, list[int]] = {}
    for i, f in enumerate(fs):
        for v in f.vertices:
            at.setdefault(v, []).append(i)
    return fs, at


def fatou_gaps(L: Lamination) -> list[Face]:
    """Faces with circle arcs on their boundary and at least three vertices."""
    return [f for f in _face_data(L)[0] if f.holes and len(f.vertices) >= 3]


def face_image(L: Lamination, f: Face) -> Optional[Face]:
    """The face carrying most of the doubled vertices of ``f``.

    A truncated face can be larger than the gap it approximates (a missing
    deeper leaf merges it with a neighbour), so its image points need not all
    lie on one face. The face holding the most of them, at least three and
    strictly more than any other face, is taken as the image; otherwise None.
    """
    fs, at = _face_data(L)
    pts = {double(v) for v in f.vertices}
    if len(pts) < 3:
        return None
    count: dict[int, int] = {}
    for p in pts:
        for i in at.get(p, ()):
            count[i] = count.get(i, 0) + 1
    if not count:
        return None
    ranked = sorted(count.items(), key=lambda t: (-t[1], t[0]))
    best, n = ranked[0]
    if n < 3 or (len(ranked) > 1 and ranked[1][1] == n):
        return None
    return fs[best]


def face_orbit(L: Lamination, f: Face, limit: int = 256) -> tuple[list[Face], Optional[int]]:
    """Forward faces of ``f`` until one repeats; the second value is the
    index where the cycle starts, or None if the orbit leaves the truncation."""
    orbit = [f]
    seen = {f: 0}
    cur = f
    for _ in range(limit):
        cur = face_image(L, cur)
        if cur is None:
            return orbit, None
        if cur in seen:
            return orbit, seen[cur]
        seen[cur] = len(orbit)
        orbit.append(cur)
    return orbit, None


def is_strictly_preperiodic(L: Lamination, f: Face) -> Optional[bool]:
    """True if the face reaches a cycle not containing it, False if it is on
    its own cycle, None when the truncation cannot tell."""
    _, start = face_orbit(L, f)
    if start is None:
        return None
    return start > 0


def component_side(V: Face, theta: Angle) -> bool:
    """True when the gap lies counterclockwise of its vertex theta, that is
    a boundary arc of the gap starts at theta."""
    if any(s == theta for s, _ in V.holes):
        return True
    if any(e == theta for _, e in V.holes):
        return False
    raise NotOnComponent(f"{format_angle(theta)} is not next to a boundary arc of the gap")


# -- capture descriptors -----------------------------------------------------------------------------

@dataclass(frozen=True)
class CaptureSpec:
    poly_angle: Angle
    k: int
    component: Face
    external_angle: Angle
    internal_angle: Angle
    m: int
    depth: int
    lamination: Lamination = field(compare=False, repr=False)

    @property
    def ccw(self) -> bool:
        return component_side(self.component, self.external_angle)

    @property
    def component_id(self) -> str:
        return ",".join(format_angle(v) for v in self.component.vertices)

    def __str__(self) -> str:
        return (f"# capture poly={format_angle(self.poly_angle)} theta={format_angle(self.external_angle)}"
                f" kappa={format_angle(self.internal_angle)} m={self.m} depth={self.depth}")


Route = Union[int, Sequence[AngleLike]]


def locate_component(L: Lamination, route: Route) -> Face:
    gaps = fatou_gaps(L)
    if isinstance(route, int):
        if not 0 <= route < len(gaps):
            raise ComponentNotFound(f"gap index {route} out of range 0..{len(gaps) - 1}")
        return gaps[route]
    want = {angle(x) for x in route}
    hits = [g for g in gaps if want <= g.vertex_set]
    if len(hits) != 1:
        raise ComponentNotFound(f"{len(hits)} gaps carry the vertices {sorted(map(format_angle, want))}")
    return hits[0]


def make_capture_spec(poly_angle: AngleLike, route: Route, external_angle: AngleLike, depth: int) -> CaptureSpec:
    poly_angle, theta = angle(poly_angle), angle(external_angle)
    if not is_periodic(poly_angle):
        raise NotPeriodicPoly(f"{format_angle(poly_angle)} is not periodic")
    if is_periodic(theta):
        raise PeriodicExternalAngle(
            f"{format_angle(theta)} is periodic and cannot lie on a strictly preperiodic Fatou gap"
        )
    L = polynomial_lamination(poly_angle, depth)
    V = locate_component(L, route)
    if theta not in V.vertex_set:
        raise NotOnComponent(f"{format_angle(theta)} is not a vertex of the gap")
    G = critical_gap(L)
    orbit, start = face_orbit(L, V)
    if start is None or start == 0:
        raise ComponentNotFound("the gap is not strictly preperiodic at this depth")
    if G not in orbit:
        raise ComponentNotFound("the gap never reaches the critical gap")
    m = orbit.index(G)
    k = period(poly_angle)
    try:
        kappa = external_to_internal(L, V, k, theta)
    except NoRoute as exc:
        raise ComponentNotFound(str(exc)) from exc
    component_side(V, theta)
    return CaptureSpec(poly_angle, k, V, theta, kappa, m, depth, L)


@dataclass(frozen=True)
class Classification:
    kind: str
    side: Optional[str] = None
    limbs: int = 1

    def __str__(self) -> str:
        return self.kind if self.side is None else f"{self.kind}({self.side})"


def limb_of(L: Lamination, V: Face, points: Iterable[Angle]) -> Optional[tuple[Angle, ...]]:
    """The class of the edge of V behind which all the points lie."""
    pts = list(points)
    from .lamination import leaf_classes

    owner = {x: cls for cls in leaf_classes(L.leaves) for x in cls}
    found = set()
    for e in V.edges:
        s, t = _behind_arc(V, e)
        if all(p in (s, t) or in_open_arc(p, s, t) for p in pts) and not all(p in (s, t) for p in pts):
            found.add(owner[e.a])
    return next(iter(found)) if len(found) == 1 else None


def classify_capture(spec: CaptureSpec, depth: Optional[int] = None, side: Optional[str] = None) -> Classification:
    """End capture when the forward orbit of V stays behind one limb of V."""
    L = spec.lamination if depth is None or depth == spec.depth else polynomial_lamination(spec.poly_angle, depth)
    V = spec.component if L is spec.lamination else locate_component(L, list(spec.component.vertices))
    limbs = set()
    for j in range(1, spec.m + spec.k):
        limb = limb_of(L, V, {iterate(v, j) for v in V.vertices})
        if limb is None:
            raise Inconclusive(f"forward face {j} is not located behind a single edge of the gap")
        limbs.add(limb)
    if len(limbs) == 1:
        return Classification(END)
    kappa = spec.internal_angle
    if kappa in (0, HALF):
        if side not in (ZERO_HALF, HALF_ONE):
            raise AmbiguousSide(f"internal angle {format_angle(kappa)} belongs to both sides")
        return Classification(CUT, side, len(limbs))
    return Classification(CUT, ZERO_HALF if kappa < HALF else HALF_ONE, len(limbs))


# -- the blow-up model -------------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubledCircle:
    theta: Angle
    depth: int
    doubled: frozenset[Angle]
    points: tuple[Mark, ...]

    def s(self, m: Mark) -> Optional[Mark]:
        return mark_image(m, self.doubled)

    @staticmethod
    def xi(m: Mark) -> Angle:
        return m.angle

    def semiconjugacy_holds(self) -> bool:
        return all(self.xi(y) == double(self.xi(m)) for m in self.points
                   if (y := self.s(m)) is not None)


def doubled_points(theta: Angle, depth: int) -> frozenset[Angle]:
    return frozenset(x for m in range(1, depth + 1) for x in preimages(theta, m))


def build_doubled_circle(theta: AngleLike, depth: int, universe: Iterable[Angle] = ()) -> DoubledCircle:
    theta = angle(theta)
    if is_periodic(theta):
        raise PeriodicExternalAngle(f"{format_angle(theta)} is periodic")
    D = doubled_points(theta, depth)
    pts: set[Angle] = set()
    for x in [*universe, *D, theta]:
        while x not in pts:
            pts.add(x)
            x = double(x)
    marks = sorted(m for x in pts for m in ((Mark(x, -1), Mark(x, 1)) if x in D else (Mark(x),)))
    return DoubledCircle(theta, depth, D, tuple(marks))


@lru_cache(maxsize=64)
def outer_leaves(theta: Angle, depth: int) -> tuple[frozenset[Chord], frozenset[Chord]]:
    """Leaves of the critical-leaf lamination of theta in common coordinates:
    the pullbacks of the critical chord whose endpoints reach theta within
    ``depth`` doublings, and all leaves including limit leaves."""
    pull = build_critical_lamination(theta, depth - 1).leaves
    return pull, pull | model_lamination(theta, depth - 1).leaves


Lift = tuple[Mark, Mark]


@dataclass(frozen=True)
class TwoSidedModel:
    circle: DoubledCircle
    inner: tuple[Lift, ...]
    outer: tuple[Lift, ...]
    model: FiniteModel
    critical_value_class: int

    def dumps(self) -> str:
        lines = [f"# twosided theta={format_angle(self.circle.theta)} depth={self.circle.depth}"]
        lines.append("marks: " + " ".join(map(str, self.circle.points)))
        lines.append("# inner")
        lines += [f"{u} {v}" for u, v in self.inner]
        lines.append("# outer")
        lines += [f"{u} {v}" for u, v in self.outer]
        for i, cls in enumerate(self.model.classes):
            if len(cls) > 1:
                lines.append(f"class {i}: " + " ".join(map(str, cls)))
        for i, tgt in sorted(self.model.dynamics().items()):
            lines.append(f"g: {i} " + " ".join(map(str, tgt)))
        return "\n".join(lines) + "\n"


def _universe(spec: CaptureSpec, depth: int) -> tuple[frozenset[Angle], frozenset[Chord], frozenset[Chord]]:
    D = doubled_points(spec.external_angle, depth)
    pull, outer = outer_leaves(spec.external_angle, depth)
    return D, pull, outer


def build_capture_model(spec: CaptureSpec, depth: int) -> TwoSidedModel:
    if depth < 1:
        raise DepthInsufficient("the blow-up model needs depth >= 1")
    theta = spec.external_angle
    D, pull, outer = _universe(spec, depth)
    L = spec.lamination
    verts = {x for c in L.leaves for x in c.endpoints} | {x for c in outer for x in c.endpoints}
    circle = build_doubled_circle(theta, depth, verts)
    inner_side = -1 if spec.ccw else 1
    partner = {}
    for c in pull:
        partner[c.a], partner[c.b] = c.b, c.a

    def lift_in(x: Angle) -> Mark:
        return Mark(x, inner_side) if x in D else Mark(x)

    def lift_out(x: Angle, y: Angle) -> Mark:
        if x not in D:
            return Mark(x)
        return Mark(x, 1 if in_open_arc(y, x, partner[x]) else -1)

    inner = sorted(tuple(sorted((lift_in(c.a), lift_in(c.b)))) for c in L.leaves)
    lifted_outer = []
    for c in outer:
        if c in pull:
            a, b = c.endpoints
            lifted_outer += [(Mark(a, 1), Mark(b, -1)), (Mark(b, 1), Mark(a, -1))]
        else:
            lifted_outer.append((lift_out(c.a, c.b), lift_out(c.b, c.a)))
    lifted_outer = sorted(tuple(sorted(p)) for p in lifted_outer)
    from .lamination import leaf_classes

    model = make_model(
        circle.points,
        [*inner, *lifted_outer],
        doubled=D,
        inner_pieces=tuple(c for c in leaf_classes(L.leaves) if len(c) > 1),
        outer_pieces=tuple(c for c in leaf_classes(outer) if len(c) > 1),
        critical_value=theta,
        poly_angle=spec.poly_angle,
        depth=depth,
    )
    return TwoSidedModel(circle, tuple(inner), tuple(lifted_outer), model, model.class_index(Mark(theta)))


# -- matings of captures ------------------------------------------------------------------------------

def capture_mating(spec: CaptureSpec, depth: int):
    """Mating of the polynomial lamination with the lamination of theta,
    the outer one stored in its own (reflected) coordinates."""
    _, _, outer = _universe(spec, depth)
    stored = Lamination(frozenset(chord_conjugate(c) for c in outer), theta=-spec.external_angle % 1, depth=depth - 1)
    return build_mating(spec.lamination, stored)


def capture_criterion(spec: CaptureSpec, depth: int) -> bool:
    """True when the central gap of the outer lamination does not separate.

    The separation test runs on the class graph of the mating; the shortcut
    compares the outer central gap with the polynomial's own. A disagreement
    raises CriterionDisagreement.
    """
    M = capture_mating(spec, depth)
    separates = central_separation(M)
    try:
        mine = central_gap(spec.lamination).vertex_set
        theirs = frozenset(-x % 1 for x in central_gap(M.outer).vertices)
        coincide = mine == theirs
    except NotFound:
        coincide = False
    if separates != coincide:
        raise CriterionDisagreement(f"separation={separates} but central gaps coincide={coincide}")
    return not separates


def capture_curves(spec: CaptureSpec, depth: int, model: Optional[FiniteModel] = None) -> CurveSystem:
    if model is None:
        model = from_mating(capture_mating(spec, depth), spec.external_angle, depth)
    return pullback_curve_system(model, spec.component, spec.internal_angle, depth,
                                 spec.external_angle, spec.ccw, base=spec.component_id)


def reglued_mating(spec: CaptureSpec, depth: int) -> tuple[FiniteModel, CurveSystem, FiniteModel]:
    """The mating model, its curve system and the result of regluing."""
    base = from_mating(capture_mating(spec, depth), spec.external_angle, depth)
    curves = capture_curves(spec, depth, base)
    return base, curves, reglue(base, curves)

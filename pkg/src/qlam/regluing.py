"""Combinatorial regluing on finite models of matings and captures.

A finite model is a partition of a marked circle. Marks are plain angles,
or pairs ``p/q-``, ``p/q+`` for an angle blown up into a short arc. The
dynamics on marks doubles the angle and keeps the side tag when the image
is itself blown up.

A curve system is the set of pullbacks of one arc through the critical
class. Cutting a class along a curve splits it into the two halves of the
boundary walk of the class (read as a planar tree of inner and outer
pieces), and the two crossing points of the curve become doubled marks.
Reversal merges the halves back.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Optional, Sequence

from .circle import Angle, double, format_angle, halves, parse_angle
from .lamination import DisjointSets, Face, sort_angles


class RegluingError(ValueError):
    pass


class InvalidCurves(RegluingError):
    pass


class CollisionDetected(RegluingError):
    pass


class NotOnBoundary(RegluingError):
    pass


class ModelFormatError(ValueError):
    pass


# -- marks -----------------------------------------------------------------------------------------

class Mark(NamedTuple):
    angle: Angle
    side: int = 0

    def __str__(self) -> str:
        return format_angle(self.angle) + {-1: "-", 0: "", 1: "+"}[self.side]


def parse_mark(text: str) -> Mark:
    side = {"-": -1, "+": 1}.get(text[-1:], 0)
    return Mark(parse_angle(text[:-1] if side else text), side)


def preimages(x: Angle, m: int) -> list[Angle]:
    """All angles whose m-th double is x."""
    pts = [x]
    for _ in range(m):
        pts = [h for p in pts for h in halves(p)]
    return sort_angles(pts)


def mark_image(m: Mark, doubled: frozenset[Angle]) -> Optional[Mark]:
    """Successor of a mark, or None at the truncation frontier (a plain point
    whose image is blown up)."""
    y = double(m.angle)
    if m.side:
        return Mark(y, m.side) if y in doubled else Mark(y)
    return None if y in doubled else Mark(y)


# -- finite models ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteModel:
    """Partition of a marked circle together with the planar data needed for
    surgery. Pieces are the classes of the inner and outer laminations alone,
    in plain circle coordinates; they are only read when cutting."""

    marks: tuple[Mark, ...]
    classes: tuple[tuple[Mark, ...], ...]
    doubled: frozenset[Angle] = frozenset()
    inner_pieces: tuple[tuple[Angle, ...], ...] = ()
    outer_pieces: tuple[tuple[Angle, ...], ...] = ()
    critical_value: Optional[Angle] = None
    poly_angle: Optional[Angle] = None
    depth: Optional[int] = None
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        idx = {m: i for i, cls in enumerate(self.classes) for m in cls}
        self._index.update(idx)

    def class_index(self, m: Mark) -> int:
        return self._index[m]

    def class_of(self, m: Mark) -> tuple[Mark, ...]:
        return self.classes[self._index[m]]

    def image(self, m: Mark) -> Optional[Mark]:
        y = mark_image(m, self.doubled)
        return y if y is not None and y in self._index else None

    def dynamics(self) -> dict[int, tuple[int, ...]]:
        """Class-level map: each class to the classes hit by its members."""
        out: dict[int, set[int]] = {}
        for i, cls in enumerate(self.classes):
            for m in cls:
                y = self.image(m)
                if y is not None:
                    out.setdefault(i, set()).add(self._index[y])
        return {i: tuple(sorted(v)) for i, v in out.items()}

    def dumps(self) -> str:
        meta = []
        if self.poly_angle is not None:
            meta.append(f"poly={format_angle(self.poly_angle)}")
        if self.critical_value is not None:
            meta.append(f"value={format_angle(self.critical_value)}")
        if self.depth is not None:
            meta.append(f"depth={self.depth}")
        lines = [" ".join(["# model"] + meta)]
        lines.append("marks: " + " ".join(map(str, self.marks)))
        for p in self.inner_pieces:
            lines.append("inner: " + " ".join(map(format_angle, p)))
        for p in self.outer_pieces:
            lines.append("outer: " + " ".join(map(format_angle, p)))
        for cls in self.classes:
            if len(cls) > 1:
                lines.append("class: " + " ".join(map(str, cls)))
        return "\n".join(lines) + "\n"


def make_model(marks: Iterable[Mark], groups: Iterable[Iterable[Mark]], **kw) -> FiniteModel:
    """Normalize: sorted marks, classes sorted internally and by least mark,
    singletons for marks in no group."""
    marks = sorted(set(marks))
    # union-find on positions: hashing marks is the expensive part
    pos = {m: i for i, m in enumerate(marks)}
    ds = DisjointSets(range(len(marks)))
    for g in groups:
        ids = [pos[m] for m in g]
        for i in ids[1:]:
            ds.union(ids[0], i)
    classes = sorted(tuple(marks[i] for i in sorted(g)) for g in ds.groups())
    return FiniteModel(tuple(marks), tuple(classes), **kw)


def loads_model(text: str) -> FiniteModel:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# model"):
        raise ModelFormatError("missing '# model' header")
    meta: dict[str, str] = {}
    for p in lines[0].split()[2:]:
        k, sep, v = p.partition("=")
        if not sep:
            raise ModelFormatError(f"bad header field {p!r}")
        meta[k] = v
    marks: list[Mark] = []
    inner, outer, groups = [], [], []
    try:
        for ln in lines[1:]:
            tag, sep, rest = ln.partition(":")
            if not sep:
                raise ModelFormatError(f"bad line {ln!r}")
            items = rest.split()
            if tag == "marks":
                marks = [parse_mark(t) for t in items]
            elif tag == "inner":
                inner.append(tuple(parse_angle(t) for t in items))
            elif tag == "outer":
                outer.append(tuple(parse_angle(t) for t in items))
            elif tag == "class":
                groups.append([parse_mark(t) for t in items])
            else:
                raise ModelFormatError(f"unknown tag {tag!r}")
        known = set(marks)
        for g in groups:
            for m in g:
                if m not in known:
                    raise ModelFormatError(f"class mark {m} is not listed")
        return make_model(
            marks,
            groups,
            doubled=frozenset(m.angle for m in marks if m.side),
            inner_pieces=tuple(inner),
            outer_pieces=tuple(outer),
            critical_value=parse_angle(meta["value"]) if "value" in meta else None,
            poly_angle=parse_angle(meta["poly"]) if "poly" in meta else None,
            depth=int(meta["depth"]) if "depth" in meta else None,
        )
    except ValueError as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(str(exc)) from exc


def canonical_form(model: FiniteModel) -> str:
    """Deterministic text of the marks, the multi-mark classes and the class
    map. Class ids follow the order of least marks."""
    lines = [f"# canonical marks={len(model.marks)} classes={len(model.classes)}"]
    lines.append("marks: " + " ".join(map(str, model.marks)))
    for i, cls in enumerate(model.classes):
        if len(cls) > 1:
            lines.append(f"class {i}: " + " ".join(map(str, cls)))
    for i, targets in sorted(model.dynamics().items()):
        lines.append(f"g {i}: " + " ".join(map(str, targets)))
    return "\n".join(lines) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# -- curve systems ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Curve:
    """A pullback of the base arc: it crosses the circle at ``a`` and
    ``b`` inside the class anchored at ``face``. ``pairing`` lists the mark
    pairs joined by the surgery."""

    face: Mark
    a: Angle
    b: Angle
    pairing: tuple[tuple[Mark, Mark], ...]


@dataclass(frozen=True)
class CurveSystem:
    base: str
    kappa: Angle
    theta: Angle
    ccw: bool
    curves: tuple[Curve, ...] = ()
    depth: int = 0
    reversed: bool = False

    def __len__(self) -> int:
        return len(self.curves)

    def dumps(self) -> str:
        head = (f"# curves base={self.base}:{format_angle(self.kappa)} theta={format_angle(self.theta)}"
                f" side={'ccw' if self.ccw else 'cw'} depth={self.depth}")
        if self.reversed:
            head += " reversed"
        lines = [head]
        for c in self.curves:
            pairs = " ".join(f"{u} {v}" for u, v in c.pairing)
            lines.append(f"curve: {c.face} {format_angle(c.a)} {format_angle(c.b)} pair: {pairs}")
        return "\n".join(lines) + "\n"


def _cross_pairing(a: Angle, b: Angle) -> tuple[tuple[Mark, Mark], ...]:
    return ((Mark(a, 1), Mark(b, -1)), (Mark(b, 1), Mark(a, -1)))


def _collapse_pairing(a: Angle, b: Angle) -> tuple[tuple[Mark, Mark], ...]:
    return ((Mark(a, -1), Mark(a, 1)), (Mark(b, -1), Mark(b, 1)))


def loads_curves(text: str) -> CurveSystem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# curves"):
        raise InvalidCurves("missing '# curves' header")
    try:
        fields = lines[0].split()[2:]
        meta = dict(f.partition("=")[::2] for f in fields if "=" in f)
        base, _, kappa = meta["base"].rpartition(":")
        curves = []
        for ln in lines[1:]:
            tag, sep, rest = ln.partition(":")
            if tag != "curve" or not sep:
                raise InvalidCurves(f"bad curve line {ln!r}")
            head, _, pair_text = rest.partition("pair:")
            face, a, b = head.split()
            toks = [parse_mark(t) for t in pair_text.split()]
            if len(toks) % 2:
                raise InvalidCurves(f"odd pairing in {ln!r}")
            pairs = tuple(zip(toks[0::2], toks[1::2]))
            curves.append(Curve(parse_mark(face), parse_angle(a), parse_angle(b), pairs))
        return CurveSystem(
            base=base,
            kappa=parse_angle(kappa),
            theta=parse_angle(meta["theta"]),
            ccw=meta.get("side", "ccw") == "ccw",
            curves=tuple(curves),
            depth=int(meta.get("depth", "0")),
            reversed="reversed" in fields,
        )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, InvalidCurves):
            raise
        raise InvalidCurves(str(exc)) from exc


def pullback_curve_system(model: FiniteModel, component: Face, kappa: Angle, depth: int,
                          theta: Angle, ccw: bool, base: str = "") -> CurveSystem:
    """Pullbacks of the arc from the critical value into ``component``.

    ``theta`` is the crossing point of the base arc with the circle (a vertex
    of the component with internal angle ``kappa``, in the class of the
    critical value) and ``ccw`` tells on which side of theta the component
    lies. Curve ``j`` joins the two members of one class that land on the
    endpoints of the critical chord after ``j`` doublings.
    """
    if theta not in component.vertex_set:
        raise NotOnBoundary(f"{format_angle(theta)} is not on the component")
    if model.critical_value is not None:
        cv = Mark(model.critical_value)
        if cv in model._index and Mark(theta) not in model.class_of(cv):
            raise NotOnBoundary("the crossing point is not in the class of the critical value")
    u, v = halves(theta)
    curves = []
    for j in range(depth):
        left = preimages(u, j)
        right = set(preimages(v, j))
        for a in left:
            if Mark(a) not in model._index:
                raise NotOnBoundary(f"curve end {format_angle(a)} is not a mark of the model")
            cls = model.class_of(Mark(a))
            mates = [m.angle for m in cls if m.angle in right]
            ends = [m.angle for m in cls if m.angle in left]
            if len(mates) != 1 or len(ends) != 1:
                raise CollisionDetected(
                    f"class of {format_angle(a)} meets {len(ends)} and {len(mates)} curve ends"
                )
            curves.append(Curve(cls[0], a, mates[0], _cross_pairing(a, mates[0])))
    curves.sort(key=lambda c: (c.a, c.b))
    return CurveSystem(base, kappa, theta, ccw, tuple(curves), depth)


def reverse_data(curves: CurveSystem) -> CurveSystem:
    """The curve system undoing the surgery: each forward curve becomes the
    instruction to merge the two sides of its crossing points."""
    flip = not curves.reversed
    new = tuple(
        replace(c, pairing=_collapse_pairing(c.a, c.b) if flip else _cross_pairing(c.a, c.b))
        for c in curves.curves
    )
    return replace(curves, curves=new, reversed=flip)


# -- surgery ---------------------------------------------------------------------------------------

def _boundary_walk(members: Sequence[Angle], nxt_in: dict, prv_out: dict) -> list[tuple[Angle, int]]:
    """Circle crossings of the boundary of a neighbourhood of one class, in
    walking order. Inside the disk the walk runs from ``x+`` along the inner
    piece to ``next_in(x)-``; outside, from ``y-`` back to ``prev_out(y)+``."""
    start = min(members)
    seq: list[tuple[Angle, int]] = []
    x = start
    while True:
        seq.append((x, 1))
        y = nxt_in.get(x, x)
        seq.append((y, -1))
        x = prv_out.get(y, y)
        if x == start:
            return seq
        if len(seq) > 2 * len(members):
            raise CollisionDetected("boundary walk does not close")


def _piece_maps(pieces: Iterable[Sequence[Angle]], step: int) -> dict[Angle, Angle]:
    out = {}
    for p in pieces:
        if len(p) < 2:
            continue
        for i, x in enumerate(p):
            out[x] = p[(i + step) % len(p)]
    return out


def _split_class(members: list[Angle], curve: Curve, ccw: bool, nxt_in, prv_in, prv_out) -> list[set[Mark]]:
    seq = _boundary_walk(members, nxt_in, prv_out)
    if len(seq) != 2 * len(members):
        raise CollisionDetected(f"class of {curve.face} is not a tree: the curve meets a loop")
    pos = {s: i for i, s in enumerate(seq)}
    cuts = []
    for e in (curve.a, curve.b):
        # the cut crosses the inner sector on the component's side of e
        first = (e, 1) if ccw else (prv_in.get(e, e), 1)
        cuts.append(pos[first])
    i, j = sorted(cuts)
    if i == j:
        raise CollisionDetected("both curve ends cut the same sector")
    halves_ = [seq[i + 1:j + 1], seq[j + 1:] + seq[:i + 1]]
    ends = {curve.a, curve.b}
    return [{Mark(x, s) if x in ends else Mark(x) for x, s in h} for h in halves_]


def _merge(model: FiniteModel, curves: CurveSystem) -> FiniteModel:
    collapse = {m.angle for c in curves.curves for pair in c.pairing for m in pair
                if pair[0].angle == pair[1].angle}

    def relabel(m: Mark) -> Mark:
        return Mark(m.angle) if m.angle in collapse else m

    groups = [[relabel(m) for m in cls] for cls in model.classes]
    for c in curves.curves:
        for u, v in c.pairing:
            if u not in model._index or v not in model._index:
                raise InvalidCurves(f"pairing {u} {v} names unknown marks")
            groups.append([relabel(u), relabel(v)])
    marks = {relabel(m) for m in model.marks}
    return make_model(marks, groups, doubled=model.doubled - collapse,
                      inner_pieces=model.inner_pieces, outer_pieces=model.outer_pieces,
                      critical_value=model.critical_value, poly_angle=model.poly_angle, depth=model.depth)


def reglue(model: FiniteModel, curves: CurveSystem) -> FiniteModel:
    """Cut every class met by a curve into the two halves of its boundary walk
    (or, for reversed data, merge the paired halves back)."""
    if not curves.curves:
        return model
    if curves.reversed:
        return _merge(model, curves)
    nxt_in = _piece_maps(model.inner_pieces, 1)
    prv_in = _piece_maps(model.inner_pieces, -1)
    prv_out = _piece_maps(model.outer_pieces, -1)
    replaced: dict[int, list[set[Mark]]] = {}
    for c in curves.curves:
        if Mark(c.a) not in model._index or Mark(c.b) not in model._index:
            raise InvalidCurves(f"curve ends {format_angle(c.a)} {format_angle(c.b)} are not plain marks")
        i = model._index[Mark(c.a)]
        if model._index[Mark(c.b)] != i:
            raise InvalidCurves("curve ends lie in different classes")
        if i in replaced:
            raise CollisionDetected(f"two curves cross the class of {c.face}")
        members = [m.angle for m in model.classes[i]]
        if any(m.side for m in model.classes[i]):
            raise InvalidCurves("class already carries doubled marks")
        parts = _split_class(members, c, curves.ccw, nxt_in, prv_in, prv_out)
        for u, v in c.pairing:
            if not any(u in p and v in p for p in parts):
                raise InvalidCurves(f"pairing {u} {v} disagrees with the surgery")
        replaced[i] = parts
    groups: list[Iterable[Mark]] = []
    marks = set(model.marks)
    for i, cls in enumerate(model.classes):
        if i in replaced:
            groups.extend(replaced[i])
        else:
            groups.append(cls)
    new_doubled = set(model.doubled)
    for c in curves.curves:
        for e in (c.a, c.b):
            marks.discard(Mark(e))
            marks.update((Mark(e, -1), Mark(e, 1)))
            new_doubled.add(e)
    return make_model(marks, groups, doubled=frozenset(new_doubled),
                      inner_pieces=model.inner_pieces, outer_pieces=model.outer_pieces,
                      critical_value=model.critical_value, poly_angle=model.poly_angle, depth=model.depth)


def roundtrip_check(model: FiniteModel, curves: CurveSystem, reverse: Optional[CurveSystem] = None) -> bool:
    """Cut along the curves, glue back with the reversed data (or the given
    one) and compare canonical forms with the original."""
    back = reglue(reglue(model, curves), reverse if reverse is not None else reverse_data(curves))
    return canonical_form(back) == canonical_form(model)


def mutate_pairing(curves: CurveSystem, index: int = 0) -> CurveSystem:
    """Negative control: the first pair of one curve gets the wrong partner,
    the same side of the other crossing point."""
    cs = list(curves.curves)
    c = cs[index]
    (u, v), *rest = c.pairing
    other = Mark(c.b if v.angle == c.a else c.a, v.side)
    cs[index] = replace(c, pairing=((u, other), *rest))
    return replace(curves, curves=tuple(cs))


# -- models from matings ---------------------------------------------------------------------------

def from_mating(M, critical_value: Optional[Angle] = None, depth: Optional[int] = None) -> FiniteModel:
    """Finite model of a mating: its classes as plain marks, with the inner
    and (reflected) outer pieces kept for surgery."""
    return FiniteModel(
        tuple(Mark(x) for x in sort_angles(x for cls in M.classes for x in cls)),
        tuple(tuple(Mark(x) for x in cls) for cls in M.classes),
        inner_pieces=tuple(M.inner_pieces()),
        outer_pieces=tuple(M.outer_pieces()),
        critical_value=critical_value,
        poly_angle=M.inner.theta,
        depth=depth,
    )

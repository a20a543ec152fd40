"""Command-line front end and SVG rendering."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .capture import (
    AmbiguousSide,
    CaptureError,
    ComponentNotFound,
    Inconclusive,
    NotOnComponent,
    NotPeriodicPoly,
    PeriodicExternalAngle,
    TwoSidedModel,
    build_capture_model,
    capture_criterion,
    capture_curves,
    capture_mating,
    classify_capture,
    make_capture_spec,
)
from .chords import Chord
from .circle import HALF, AngleParseError, format_angle, orbit_info, parse_angle
from .critlam import build_critical_lamination, central_gap, clean
from .lamination import Lamination, LaminationFormatError, dumps
from .mating import DepthInsufficient, build_mating, obstruction
from .regluing import (
    CollisionDetected,
    InvalidCurves,
    Mark,
    ModelFormatError,
    NotOnBoundary,
    canonical_form,
    digest,
    from_mating,
    loads_curves,
    loads_model,
    reglue,
    roundtrip_check,
)

OK = 0
USAGE = 1
OBSTRUCTED = 2
SHALLOW = 3
CRITERION_FALSE = 4
MISMATCH = 5
PERIODIC_ANGLE = 6
NO_COMPONENT = 7
NOT_ON_COMPONENT = 8
NOT_PERIODIC_POLY = 9
UNCLASSIFIED = 10
BAD_CURVES = 11
COLLISION = 12
ROUNDTRIP_FAILED = 13

EXIT_CODES = """exit codes:
  0   success (mate: unobstructed, capture: MATCH, reglue: roundtrip holds)
  1   usage, parse or file-format error
  2   mate: the mating is obstructed
  3   depth too small to see the relevant periodic leaves
  4   capture: the capture criterion fails (obstructed capture)
  5   capture: MISMATCH between the capture model and the reglued mating
  6   capture: the external angle is periodic
  7   capture: the component cannot be located or is not strictly preperiodic
  8   capture: the external angle is not a vertex of the component
  9   capture: the polynomial angle is not periodic
  10  capture: classification inconclusive or side ambiguous
  11  reglue: invalid curve system or curve not on a class boundary
  12  reglue: collision while splitting a class
  13  reglue: roundtrip check failed
"""


# -- SVG rendering -------------------------------------------------------------------------------------

@dataclass(frozen=True)
class RenderSpec:
    width: int = 600
    height: int = 600
    circle_stroke: float = 1.5
    leaf_stroke: float = 1.0
    colors: dict = field(default_factory=lambda: {
        "circle": "#000000", "inner": "#1f4e9c", "outer": "#b3261e", "critical": "#2e7d32",
    })
    labels: bool = False
    offset: float = 0.004  # turn offset separating the two sides of a doubled point


def _xy(t: float, spec: RenderSpec) -> tuple[float, float]:
    r = 0.45 * min(spec.width, spec.height)
    a = 2 * math.pi * t
    # screen y grows downward; flip so angles run counterclockwise
    return spec.width / 2 + r * math.cos(a), spec.height / 2 - r * math.sin(a)


def geodesic(s: float, t: float) -> tuple[Optional[tuple[float, float]], float]:
    """Center and radius of the circle through e(s), e(t) orthogonal to the
    unit circle, or (None, 0) for a diameter."""
    px, py = math.cos(2 * math.pi * s), math.sin(2 * math.pi * s)
    qx, qy = math.cos(2 * math.pi * t), math.sin(2 * math.pi * t)
    d = 1 + px * qx + py * qy
    if abs(d) < 1e-12:
        return None, 0.0
    cx, cy = (px + qx) / d, (py + qy) / d
    return (cx, cy), math.hypot(px - cx, py - cy)


def _fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


def _path(s: float, t: float, spec: RenderSpec) -> str:
    x0, y0 = _xy(s, spec)
    x1, y1 = _xy(t, spec)
    c, r = geodesic(s, t)
    if c is None:
        return f"M {_fmt(x0)} {_fmt(y0)} L {_fmt(x1)} {_fmt(y1)}"
    scale = 0.45 * min(spec.width, spec.height)
    cx, cy = spec.width / 2 + scale * c[0], spec.height / 2 - scale * c[1]
    sweep = 1 if (x0 - cx) * (y1 - cy) - (y0 - cy) * (x1 - cx) > 0 else 0
    R = _fmt(scale * r)
    return f"M {_fmt(x0)} {_fmt(y0)} A {R} {R} 0 0 {sweep} {_fmt(x1)} {_fmt(y1)}"


def _mark_pos(m: Mark, spec: RenderSpec) -> float:
    return float(m.angle) + m.side * spec.offset


def render_svg(obj, spec: Optional[RenderSpec] = None) -> str:
    """SVG text for a Lamination or a TwoSidedModel. Leaves are drawn in
    sorted order so the output is stable."""
    spec = spec or RenderSpec()
    col = spec.colors
    w, h = spec.width, spec.height
    cx, cy, r = w / 2, h / 2, 0.45 * min(w, h)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="none" '
        f'stroke="{col["circle"]}" stroke-width="{spec.circle_stroke}"/>',
    ]

    def leaf(d: str, color: str, extra: str = "") -> None:
        out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{spec.leaf_stroke}"{extra}/>')

    if isinstance(obj, TwoSidedModel):
        for a in sorted(obj.circle.doubled):
            # thicken the boundary between the two sides of a doubled point
            s0, s1 = float(a) - spec.offset, float(a) + spec.offset
            x0, y0 = _xy(s0, spec)
            x1, y1 = _xy(s1, spec)
            out.append(f'<path d="M {_fmt(x0)} {_fmt(y0)} A {_fmt(r)} {_fmt(r)} 0 0 0 {_fmt(x1)} {_fmt(y1)}" '
                       f'fill="none" stroke="{col["circle"]}" stroke-width="{3 * spec.circle_stroke}"/>')
        for u, v in obj.inner:
            leaf(_path(_mark_pos(u, spec), _mark_pos(v, spec), spec), col["inner"])
        for u, v in obj.outer:
            leaf(_path(_mark_pos(u, spec), _mark_pos(v, spec), spec), col["outer"], ' stroke-dasharray="4 2"')
    else:
        crit = None
        if obj.theta is not None:
            crit = Chord(obj.theta / 2, obj.theta / 2 + HALF)
        for c in sorted(obj.leaves):
            leaf(_path(float(c.a), float(c.b), spec), col["critical"] if c == crit else col["inner"])
    if spec.labels:
        pts = sorted({x for c in obj.leaves for x in c.endpoints}) if isinstance(obj, Lamination) else []
        for x in pts:
            lx, ly = _xy(float(x), RenderSpec(spec.width, spec.height))
            out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="8">{format_angle(x)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- commands ------------------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 so that 2 stays free for obstructions."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _angle(text: str):
    try:
        return parse_angle(text)
    except (AngleParseError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r} ({exc})")


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_lam(args) -> int:
    crit = build_critical_lamination(args.theta, args.depth)
    lam = clean(crit) if args.clean else crit.pullback_leaves
    print(f"case={crit.case_tag}")
    print(f"leaves={len(lam.leaves)}")
    try:
        g = central_gap(lam)
        print("central_gap=" + " ".join(format_angle(v) for v in g.vertices))
    except LookupError:
        print("central_gap=none")
    _write(args.out, dumps(lam))
    if args.svg:
        _write(args.svg, render_svg(lam))
    return OK


def cmd_mate(args) -> int:
    L1 = clean(build_critical_lamination(args.p, args.depth))
    L2 = clean(build_critical_lamination(args.q, args.depth))
    bound = args.period_bound or max(orbit_info(args.p).period, orbit_info(args.q).period)
    M = build_mating(L1, L2)
    try:
        rep = obstruction(M, bound)
    except DepthInsufficient as exc:
        return _fail(SHALLOW, str(exc))
    print(f"classes={len(M.classes)}")
    print("obstructed" if rep.obstructed else "unobstructed")
    _write(args.report, rep.dumps())
    return OBSTRUCTED if rep.obstructed else OK


def _route(text: str):
    if "," not in text and "/" not in text:
        return int(text)
    return [parse_angle(t) for t in text.split(",") if t]


def cmd_capture(args) -> int:
    try:
        spec = make_capture_spec(args.poly, _route(args.component), args.theta, args.depth)
    except PeriodicExternalAngle as exc:
        return _fail(PERIODIC_ANGLE, str(exc))
    except ComponentNotFound as exc:
        return _fail(NO_COMPONENT, str(exc))
    except NotOnComponent as exc:
        return _fail(NOT_ON_COMPONENT, str(exc))
    except NotPeriodicPoly as exc:
        return _fail(NOT_PERIODIC_POLY, str(exc))
    n = args.model_depth
    print(str(spec))
    if args.classify:
        try:
            print(f"{classify_capture(spec, side=args.side)} kappa={format_angle(spec.internal_angle)}")
        except (AmbiguousSide, Inconclusive) as exc:
            return _fail(UNCLASSIFIED, str(exc))
    try:
        cap = build_capture_model(spec, n)
    except DepthInsufficient as exc:
        return _fail(SHALLOW, str(exc))
    if args.model:
        _write(args.model, cap.dumps())
    if args.svg:
        _write(args.svg, render_svg(cap))
    if not capture_criterion(spec, n):
        print("criterion=false")
        return CRITERION_FALSE
    print("criterion=true")
    if args.mating or args.curves or args.check_mating:
        base = from_mating(capture_mating(spec, n), spec.external_angle, n)
        curves = capture_curves(spec, n, base)
        _write(args.mating, base.dumps())
        _write(args.curves, curves.dumps())
        if args.check_mating:
            try:
                reglued = reglue(base, curves)
            except CollisionDetected as exc:
                return _fail(COLLISION, str(exc))
            a, b = digest(canonical_form(cap.model)), digest(canonical_form(reglued))
            if a != b:
                print(f"MISMATCH capture={a} reglued={b}")
                return MISMATCH
            print(f"MATCH {a}")
    return OK


def cmd_reglue(args) -> int:
    try:
        model = loads_model(_read(args.model))
        curves = loads_curves(_read(args.curves))
    except (ModelFormatError, InvalidCurves) as exc:
        return _fail(USAGE, f"parse error: {exc}")
    try:
        result = reglue(model, curves)
    except (InvalidCurves, NotOnBoundary) as exc:
        return _fail(BAD_CURVES, str(exc))
    except CollisionDetected as exc:
        return _fail(COLLISION, str(exc))
    _write(args.out, result.dumps())
    if args.canonical:
        _write(args.canonical, canonical_form(result))
    if args.roundtrip:
        ok = roundtrip_check(model, curves)
        print(f"roundtrip={'ok' if ok else 'failed'}")
        if not ok:
            return ROUNDTRIP_FAILED
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qlam", description="Quadratic invariant laminations.", epilog=EXIT_CODES,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    lam = sub.add_parser("lam", help="critical-leaf lamination of an angle", epilog=EXIT_CODES,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    lam.add_argument("--theta", type=_angle, required=True)
    lam.add_argument("--depth", type=int, required=True)
    lam.add_argument("--clean", action="store_true", help="remove caterpillar leaves")
    lam.add_argument("--svg", help="write an SVG drawing ('-' for stdout)")
    lam.add_argument("--out", help="write the lamination file ('-' for stdout)")
    lam.set_defaults(func=cmd_lam)

    mate = sub.add_parser("mate", help="mating of two laminations and its obstruction", epilog=EXIT_CODES,
                          formatter_class=argparse.RawDescriptionHelpFormatter)
    mate.add_argument("--p", type=_angle, required=True)
    mate.add_argument("--q", type=_angle, required=True)
    mate.add_argument("--depth", type=int, required=True)
    mate.add_argument("--period-bound", type=int, default=None,
                      help="largest period searched (default: the larger of the two periods)")
    mate.add_argument("--report", help="write the obstruction report ('-' for stdout)")
    mate.set_defaults(func=cmd_mate)

    cap = sub.add_parser("capture", help="blow-up model of a capture", epilog=EXIT_CODES,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    cap.add_argument("--poly", type=_angle, required=True, help="periodic angle of the polynomial")
    cap.add_argument("--component", required=True,
                     help="gap index, or comma-separated vertices singling out one gap")
    cap.add_argument("--theta", type=_angle, required=True, help="external angle on the gap")
    cap.add_argument("--depth", type=int, default=8, help="depth of the polynomial lamination")
    cap.add_argument("--model-depth", type=int, default=6, help="pullback depth of the models")
    cap.add_argument("--classify", action="store_true")
    cap.add_argument("--side", choices=["ZeroHalf", "HalfOne"], default=None,
                     help="side used when the internal angle is 0 or 1/2")
    cap.add_argument("--model", help="write the two-sided model")
    cap.add_argument("--svg", help="write an SVG drawing of the two-sided model")
    cap.add_argument("--mating", help="write the finite mating model")
    cap.add_argument("--curves", help="write the curve system")
    cap.add_argument("--check-mating", action="store_true",
                     help="compare the capture model with the reglued mating")
    cap.set_defaults(func=cmd_capture)

    rg = sub.add_parser("reglue", help="apply a curve system to a finite model", epilog=EXIT_CODES,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    rg.add_argument("--model", required=True)
    rg.add_argument("--curves", required=True)
    rg.add_argument("--out", default="-", help="where to write the reglued model (default stdout)")
    rg.add_argument("--canonical", help="also write the canonical form")
    rg.add_argument("--roundtrip", action="store_true", help="check that reversing restores the input")
    rg.set_defaults(func=cmd_reglue)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, LaminationFormatError, ModelFormatError, InvalidCurves) as exc:
        return _fail(USAGE, str(exc))
    except CaptureError as exc:
        return _fail(USAGE, str(exc))
    except ValueError as exc:
        return _fail(USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())

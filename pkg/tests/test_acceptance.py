"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line before asserting.
Heavy corpora are built once per session and their setup time is reported
separately from the timed checks.
"""

from __future__ import annotations

import subprocess
import sys
import time
from fractions import Fraction as F
from functools import lru_cache

import pytest

from oracles import basilica_subdivision, chord_generation, dbl, naive_orbit, norm
from qlam import capture as cap
from qlam.circle import exact_period_angles
from qlam.critlam import FINITE_CRITICAL_GAP, PERIODIC_ENDPOINT, PLAIN, build_critical_lamination, clean
from qlam.lamination import faces, is_clean, validate
from qlam.mating import DepthInsufficient, build_mating, collapse_map, obstruction
from qlam.portraits import MultipleFound, NotFound, is_formal, portraits_up_to, principal_coexisting
from qlam.regluing import canonical_form, mutate_pairing, reverse_data, roundtrip_check

POLYS = (F(1, 3), F(1, 7), F(3, 7), F(1, 15))
AIRPLANE_GAP = [F(5, 28), F(81, 448)]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}", flush=True)
    return emit


def leafset(lam):
    return {norm(c.a, c.b) for c in lam.leaves}


def reduced(max_den):
    return [F(p, q) for q in range(1, max_den + 1) for p in range(q) if F(p, q).denominator == q]


@lru_cache(maxsize=None)
def critical_corpus():
    return tuple(build_critical_lamination(t, 8) for t in reduced(63))


@lru_cache(maxsize=None)
def capture_corpus():
    """Capture specs on strictly preperiodic gaps, plus every vertex of an
    airplane gap meeting two limbs (the cut captures)."""
    specs = []
    for p in POLYS:
        L = cap.polynomial_lamination(p, 8)
        for i, V in enumerate(cap.fatou_gaps(L)):
            if not cap.is_strictly_preperiodic(L, V):
                continue
            for th in V.vertices:
                if th.denominator > 127:
                    continue
                try:
                    specs.append(cap.make_capture_spec(p, i, th, 8))
                except cap.CaptureError:
                    pass
    L = cap.polynomial_lamination(F(3, 7), 8)
    V = cap.locate_component(L, AIRPLANE_GAP)
    specs += [cap.make_capture_spec(F(3, 7), AIRPLANE_GAP, th, 8) for th in V.vertices]
    unique = {(str(s), s.component.vertices): s for s in specs}
    return tuple(s for s in unique.values() if cap.capture_criterion(s, 6))


@lru_cache(maxsize=None)
def reglued_corpus():
    return tuple(cap.reglued_mating(s, 6) for s in capture_corpus())


def test_criterion_1_clean_basilica(report):
    target = norm(F(1, 3), F(2, 3))
    t0 = time.perf_counter()
    got = {d: leafset(clean(build_critical_lamination(F(1, 3), d))) for d in range(1, 6)}
    elapsed = time.perf_counter() - t0
    bad = []
    for d, leaves in got.items():
        oracle = {c for c in basilica_subdivision(F(1, 3) / 2 ** (d + 1))
                  if (g := chord_generation(c, target)) is not None and g <= d}
        if leaves != oracle:
            bad.append(d)
    ok = not bad and elapsed < 1
    report(1, ok, f"depths 1..5 match subdivision oracle, mismatches={bad}, {elapsed:.3f}s < 1s")
    assert not bad
    assert elapsed < 1


def _scaled(L):
    # integer numerators over one common denominator for the brute-force checks
    D = L.theta.denominator << (L.depth + 2)
    num = lambda x: x.numerator * (D // x.denominator)
    l0 = tuple(sorted((num(L.critical_leaf.a), num(L.critical_leaf.b))))
    return D, l0, {tuple(sorted((num(c.a), num(c.b)))) for c in L.leaves}


def _separates(c1, c2):
    # the brute-force crossing test on sorted integer pairs
    (a, b), (c, d) = c1, c2
    return len({a, b, c, d}) == 4 and (a < c < b) != (a < d < b)


def test_criterion_2_critical_laminations(report):
    t0 = time.perf_counter()
    corpus = critical_corpus()
    bad = []
    for L in corpus:
        D, (a, b), ends = _scaled(L)
        if not validate(L.pullback_leaves) or any(_separates((a, b), e) for e in ends):
            bad.append(L.theta)
            continue
        # every leaf but the critical one has its image in the truncation
        images = {tuple(sorted((2 * x % D, 2 * y % D))) for x, y in ends if (x, y) != (a, b)}
        if not images <= ends:
            bad.append(L.theta)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    report(2, ok, f"{len(corpus)} angles (q <= 63, depth 8), failures={len(bad)}, {elapsed:.1f}s < 30s")
    assert not bad
    assert elapsed < 30


def test_criterion_3_clean_and_case_tags(report):
    t0 = time.perf_counter()
    corpus = critical_corpus()
    unclean, mistagged, wrong = [], [], []
    for L in corpus:
        C = clean(L)
        if not is_clean(C):
            unclean.append(L.theta)
        periodic_end = any(naive_orbit(x)[0] == 0 for x in (L.critical_leaf.a, L.critical_leaf.b))
        if (L.case_tag == PERIODIC_ENDPOINT) != periodic_end:
            mistagged.append(L.theta)
        if L.case_tag == PLAIN and C.leaves != L.leaves:
            wrong.append(L.theta)
        if L.case_tag == FINITE_CRITICAL_GAP and L.critical_leaf in C.leaves:
            wrong.append(L.theta)
    elapsed = time.perf_counter() - t0
    ok = not (unclean or mistagged or wrong)
    report(3, ok, f"{len(corpus)} angles, unclean={len(unclean)}, mistagged={len(mistagged)}, "
                  f"bad clean={len(wrong)}, {elapsed:.1f}s")
    assert not unclean
    assert not mistagged
    assert not wrong


def test_criterion_4_periodic_angles_avoid_preperiodic_faces(report):
    periodic = {x for n in range(1, 7) for x in exact_period_angles(n)}
    assert all(naive_orbit(x)[0] == 0 for x in periodic)
    polys = POLYS + (F(1, 5), F(2, 5))
    t0 = time.perf_counter()
    hits, checked, undecided = [], 0, 0
    for p in polys:
        L = cap.polynomial_lamination(p, 8)
        for f in faces(L):
            verdict = cap.is_strictly_preperiodic(L, f)
            if verdict is None:
                undecided += 1
            if not verdict:
                continue
            checked += 1
            hits += [(p, v) for v in f.vertices if v in periodic]
    elapsed = time.perf_counter() - t0
    ok = not hits and elapsed < 30
    report(4, ok, f"{checked} strictly preperiodic faces over {len(polys)} laminations, "
                  f"periodic vertices={len(hits)}, undecided faces={undecided}, {elapsed:.1f}s < 30s")
    assert not hits
    assert elapsed < 30


def test_criterion_5_semiconjugacies(report):
    bad_marks = 0
    thetas = sorted({s.external_angle for s in capture_corpus()})
    for th in thetas:
        dc = cap.build_doubled_circle(th, 4)
        for m in dc.points:
            y = dc.s(m)
            if y is not None and dc.xi(y) != dbl(dc.xi(m)):
                bad_marks += 1
    bad_vertices, vertices = 0, 0
    for theta, k in ((F(1, 3), 2), (F(1, 7), 3), (F(3, 7), 3), (F(1, 15), 4), (F(1, 5), 4), (F(2, 5), 4)):
        L = cap.polynomial_lamination(theta, 8)
        C = collapse_map(L, k)
        for v in C.gap.vertices:
            w = v
            for _ in range(k):
                w = dbl(w)
            vertices += 1
            if C.xi(w) != dbl(C.xi(v)):
                bad_vertices += 1
    ok = not bad_marks and not bad_vertices
    report(5, ok, f"{len(thetas)} doubled circles bad marks={bad_marks}, "
                  f"{vertices} gap vertices bad={bad_vertices}")
    assert not bad_marks
    assert not bad_vertices


def test_criterion_6_unique_principal_portrait(report):
    portraits = portraits_up_to(63)
    formal = [P for P in portraits if is_formal(P)]
    counts = {"one": 0, "none": 0, "multiple": 0}
    formal_bad = []
    for P in portraits:
        try:
            principal_coexisting(P, 6)
            outcome = "one"
        except NotFound:
            outcome = "none"
        except MultipleFound:
            outcome = "multiple"
        counts[outcome] += 1
        if P in formal and outcome != "one":
            formal_bad.append(P)
    ok = not formal_bad and counts["multiple"] == 0
    report(6, ok, f"{len(formal)} formal portraits (q <= 63) without a unique match={len(formal_bad)}, "
                  f"MultipleFound over all {len(portraits)}={counts['multiple']}")
    assert not formal_bad
    assert counts["multiple"] == 0


@lru_cache(maxsize=None)
def cl(theta):
    return clean(build_critical_lamination(theta, 8))


def mating_pairs():
    A = {n: exact_period_angles(n) for n in range(2, 7)}
    low = [x for n in (2, 3, 4) for x in A[n]]
    three = [x for n in (2, 3) for x in A[n]]
    high = [x for n in (5, 6) for x in A[n]]
    # strictly preperiodic angles landing on a short cycle
    pre = [x for x in reduced(24) if x.denominator % 2 == 0 and naive_orbit(x)[1] <= 4]
    pairs = [(p, q) for p in low for q in low]
    for side in (high, pre):
        pairs += [(p, q) for p in side for q in three] + [(q, p) for p in side for q in three]
    return pairs


def test_criterion_7_obstruction_tests_agree(report):
    pairs = mating_pairs()
    t0 = time.perf_counter()
    disagree, shallow, verdicts = [], [], {True: 0, False: 0}
    for p, q in pairs:
        bound = max(naive_orbit(p)[1], naive_orbit(q)[1])
        try:
            r = obstruction(build_mating(cl(p), cl(q)), bound)
        except DepthInsufficient:
            shallow.append((p, q))
            continue
        if not r.agree:
            disagree.append((p, q))
        else:
            verdicts[r.obstructed] += 1
    basilica, rabbit = F(1, 3), F(1, 7)
    deep = lambda t: clean(build_critical_lamination(t, 10))
    bb = obstruction(build_mating(deep(basilica), deep(basilica)), 10)
    br = obstruction(build_mating(deep(basilica), deep(rabbit)), 10)
    elapsed = time.perf_counter() - t0
    ok = not disagree and not shallow and bb.agree and bb.obstructed and br.agree and not br.obstructed
    report(7, ok, f"{len(pairs)} pairs, disagreements={len(disagree)}, too shallow={len(shallow)}, "
                  f"obstructed={verdicts[True]} unobstructed={verdicts[False]}, "
                  f"basilica|basilica obstructed={bb.obstructed}, basilica|rabbit obstructed={br.obstructed}, "
                  f"{elapsed:.1f}s")
    assert not disagree
    assert not shallow
    assert bb.agree and bb.obstructed
    assert br.agree and not br.obstructed


def test_criterion_8_roundtrip(report):
    s0 = time.perf_counter()
    specs = capture_corpus()
    setup = time.perf_counter() - s0
    t0 = time.perf_counter()
    instances = reglued_corpus()
    good = sum(roundtrip_check(base, curves) for base, curves, _ in instances)
    mutated = sum(roundtrip_check(base, curves, mutate_pairing(reverse_data(curves)))
                  for base, curves, _ in instances)
    elapsed = time.perf_counter() - t0
    ok = good == len(specs) and mutated == 0 and elapsed < 60
    report(8, ok, f"roundtrip {good}/{len(specs)}, mutated pairing passes={mutated}, "
                  f"{elapsed:.1f}s < 60s (corpus setup {setup:.1f}s)")
    assert good == len(specs)
    assert mutated == 0
    assert elapsed < 60


def test_criterion_9_capture_equals_reglued_mating(report):
    specs = capture_corpus()
    instances = reglued_corpus()
    t0 = time.perf_counter()
    mismatch, kinds, side_bad = [], {cap.END: 0, cap.CUT: 0}, []
    for spec, (_, _, reglued) in zip(specs, instances):
        kappa = spec.internal_angle
        try:
            sides = [cap.classify_capture(spec)]
        except cap.AmbiguousSide:
            sides = [cap.classify_capture(spec, side=s) for s in (cap.ZERO_HALF, cap.HALF_ONE)]
        kind = sides[0].kind
        kinds[kind] += 1
        if kind == cap.CUT:
            for c in sides:
                lo, hi = (F(0), F(1, 2)) if c.side == cap.ZERO_HALF else (F(1, 2), F(1))
                if not (lo <= kappa <= hi or (kappa == 0 and c.side == cap.HALF_ONE)):
                    side_bad.append(spec)
        model = cap.build_capture_model(spec, 6).model
        if canonical_form(model) != canonical_form(reglued):
            mismatch.append(spec)
    elapsed = time.perf_counter() - t0
    ok = not mismatch and not side_bad and kinds[cap.CUT] > 0 and elapsed < 120
    report(9, ok, f"{len(specs)} captures (end={kinds[cap.END]}, cut={kinds[cap.CUT]}), "
                  f"mismatches={len(mismatch)}, side errors={len(side_bad)}, {elapsed:.1f}s < 120s")
    assert not mismatch
    assert not side_bad
    assert kinds[cap.CUT] > 0
    assert elapsed < 120


def cli(tmp, *argv):
    proc = subprocess.run([sys.executable, "-m", "qlam.cli", *argv], cwd=tmp, capture_output=True)
    files = {p.name: p.read_bytes() for p in sorted(tmp.iterdir())}
    return proc.returncode, proc.stdout, proc.stderr, files


def test_criterion_10_cli_is_deterministic(report, tmp_path):
    commands = [
        ["lam", "--theta", "3/7", "--depth", "5", "--clean", "--out", "lam.txt", "--svg", "lam.svg"],
        ["mate", "--p", "1/3", "--q", "1/3", "--depth", "6", "--report", "report.txt"],
        ["mate", "--p", "1/3", "--q", "1/7", "--depth", "8"],
        ["capture", "--poly", "1/3", "--component", "1/6,1/12", "--theta", "1/6", "--model-depth", "3",
         "--classify", "--model", "model.txt", "--svg", "model.svg", "--mating", "mating.txt",
         "--curves", "curves.txt", "--check-mating"],
        ["capture", "--poly", "3/7", "--component", "5/28,81/448", "--theta", "5/28", "--model-depth", "3",
         "--classify", "--side", "HalfOne"],
        ["reglue", "--model", "mating.txt", "--curves", "curves.txt", "--canonical", "canon.txt", "--roundtrip"],
    ]
    runs = []
    for i in range(2):
        work = tmp_path / f"run{i}"
        work.mkdir()
        outputs = []
        for argv in commands:
            outputs.append(cli(work, *argv))
        runs.append(outputs)
    differing = [" ".join(c[:1]) for c, a, b in zip(commands, *runs) if a != b]
    codes = [out[0] for out in runs[0]]
    ok = not differing and codes == [0, 2, 0, 0, 0, 0]
    report(10, ok, f"{len(commands)} commands run twice, differing={differing}, exit codes={codes}")
    assert not differing
    assert codes == [0, 2, 0, 0, 0, 0]

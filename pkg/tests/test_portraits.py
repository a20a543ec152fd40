from __future__ import annotations

from fractions import Fraction as F

import pytest

from oracles import linked
from qlam.chords import Chord
from qlam.portraits import (
    Crossing,
    NotPeriodic,
    OrbitPortrait,
    PortraitError,
    coexist,
    is_formal,
    is_principal,
    loads_portrait,
    portrait_from_chord,
    portraits_up_to,
    principal_coexisting,
    principal_portraits,
    try_portrait,
)


def C(a, b):
    return Chord(F(a), F(b))


BASILICA = portrait_from_chord(C(F(1, 3), F(2, 3)))
RABBIT = portrait_from_chord(C(F(1, 7), F(2, 7)))
FIFTHS = portrait_from_chord(C(F(1, 5), F(4, 5)))


def test_cycles():
    assert len(BASILICA) == 1
    assert RABBIT.chords == (C(F(1, 7), F(2, 7)), C(F(2, 7), F(4, 7)), C(F(1, 7), F(4, 7)))
    assert FIFTHS.chord_set == {C(F(1, 5), F(4, 5)), C(F(2, 5), F(3, 5))}


def test_construction_errors():
    with pytest.raises(NotPeriodic):
        portrait_from_chord(C(F(1, 6), F(1, 3)))
    with pytest.raises(Crossing):
        portrait_from_chord(C(F(1, 5), F(3, 5)))
    with pytest.raises(PortraitError):
        OrbitPortrait((C(F(1, 7), F(2, 7)),))
    assert try_portrait(C(F(1, 5), F(3, 5))) is None


def test_coexist():
    assert coexist(BASILICA, FIFTHS)
    assert coexist(RABBIT, RABBIT)
    brute = not any(linked((p.a, p.b), (q.a, q.b)) for p in BASILICA.chords for q in RABBIT.chords)
    assert coexist(BASILICA, RABBIT) == brute


def test_principal():
    assert is_principal(BASILICA)
    assert is_principal(RABBIT)
    assert not is_principal(FIFTHS)


def test_principal_coexisting_examples():
    assert principal_coexisting(FIFTHS, 4) == BASILICA
    assert principal_coexisting(BASILICA, 6) == BASILICA
    assert principal_coexisting(RABBIT, 6) == RABBIT


def test_principal_portraits_counts():
    # one rotational cycle per reduced rotation number p/n
    ps = principal_portraits(5)
    periods = sorted(len(P.vertices()) for P in ps)
    assert periods == [2, 3, 3, 4, 4, 5, 5, 5, 5]


def test_conjugation_preserves_coexistence():
    for P in portraits_up_to(15):
        for Q in principal_portraits(4):
            assert coexist(P, Q) == coexist(P.conjugate(), Q.conjugate())


def test_enumeration_is_complete_for_small_denominators():
    found = {P.chord_set for P in portraits_up_to(9)}
    # brute force over all chords with odd denominators up to 9
    pts = sorted({F(a, q) for q in (1, 3, 5, 7, 9) for a in range(q)})
    expected = set()
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            P = try_portrait(Chord(x, y))
            if P is not None:
                expected.add(P.chord_set)
    assert found == expected


def test_formal():
    assert is_formal(RABBIT)
    assert is_formal(FIFTHS)


def test_text():
    P = loads_portrait("# portrait\n1/7 2/7\n")
    assert P == RABBIT
    assert str(P).splitlines()[0] == "# portrait"

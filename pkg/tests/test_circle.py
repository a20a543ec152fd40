from __future__ import annotations

from fractions import Fraction as F

import pytest

from oracles import naive_orbit
from qlam.circle import (
    AngleParseError,
    conjugate,
    double,
    exact_period_angles,
    format_angle,
    halves,
    in_closed_arc,
    in_open_arc,
    iterate,
    orbit_info,
    parse_angle,
    period,
    periodic_angles,
)


@pytest.mark.parametrize("a,b", [(F(1, 3), F(2, 3)), (F(2, 3), F(1, 3)), (F(0), F(0)), (F(3, 4), F(1, 2))])
def test_double(a, b):
    assert double(a) == b


@pytest.mark.parametrize("a,pair", [
    (F(1, 3), (F(1, 6), F(2, 3))),
    (F(0), (F(0), F(1, 2))),
    (F(1, 7), (F(1, 14), F(4, 7))),
])
def test_halves(a, pair):
    assert halves(a) == pair
    assert all(double(h) == a for h in pair)


@pytest.mark.parametrize("a,pre,per", [
    (F(1, 7), 0, 3), (F(1, 3), 0, 2), (F(1, 6), 1, 2), (F(0), 0, 1), (F(5, 12), 2, 2),
])
def test_orbit_info_examples(a, pre, per):
    info = orbit_info(a)
    assert (info.preperiod, info.period) == (pre, per)
    assert info.is_periodic == (pre == 0)


def test_orbit_info_matches_naive_iteration():
    for q in range(1, 80):
        for p in range(q):
            x = F(p, q)
            info = orbit_info(x)
            assert (info.preperiod, info.period) == naive_orbit(x), x


def test_orbit_cycle_closes():
    info = orbit_info(F(1, 7))
    assert info.cycle == (F(1, 7), F(2, 7), F(4, 7))


@pytest.mark.parametrize("a,b", [(F(1, 3), F(2, 3)), (F(0), F(0)), (F(1, 7), F(6, 7))])
def test_conjugate(a, b):
    assert conjugate(a) == b


def test_conjugation_commutes_with_doubling():
    for q in (5, 9, 12, 31):
        for p in range(q):
            x = F(p, q)
            assert double(conjugate(x)) == conjugate(double(x))


def test_open_arc():
    assert in_open_arc(F(1, 4), F(0), F(1, 2))
    assert not in_open_arc(F(3, 4), F(0), F(1, 2))
    assert not in_open_arc(F(0), F(0), F(1, 2))
    # wrapping arc
    assert in_open_arc(F(0), F(3, 4), F(1, 4))
    assert in_closed_arc(F(1, 2), F(0), F(1, 2))


def test_iterate_matches_repeated_doubling():
    x = F(5, 93)
    y = x
    for n in range(12):
        assert iterate(x, n) == y
        y = double(y)


def test_parse_and_format_roundtrip():
    for text in ("1/3", "0/1", "5/12", "127/128"):
        assert format_angle(parse_angle(text)) == text
    assert parse_angle("4/3") == F(1, 3)
    assert parse_angle("2/6") == F(1, 3)
    with pytest.raises(AngleParseError):
        parse_angle("1/0")
    with pytest.raises(AngleParseError):
        parse_angle("a/b")


def test_periodic_angle_lists():
    assert periodic_angles(2) == [F(0), F(1, 3), F(2, 3)]
    assert exact_period_angles(3) == [F(k, 7) for k in range(1, 7)]
    for n in range(1, 7):
        assert all(period(x) == n for x in exact_period_angles(n))
    # necklace count: primitive words of length 5
    assert len(exact_period_angles(5)) == 30

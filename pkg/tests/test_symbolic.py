from __future__ import annotations

from fractions import Fraction as F

from qlam.circle import iterate
from qlam.critlam import critical_partition
from qlam.symbolic import (
    Partition,
    cylinder,
    fixed_points,
    periodic_class,
    preimages_along,
    preperiodic_class,
    same_class,
)

HALVES = Partition.from_groups([[F(0), F(1, 2)]])


def test_binary_partition_symbols_are_binary_digits():
    # with walls at 0 and 1/2, arc 0 is [0, 1/2) and arc 1 is [1/2, 1)
    x = F(5, 13)
    pre, cyc = HALVES.itinerary(x)
    assert pre == ()
    digits = []
    y = x
    for _ in range(len(cyc)):
        digits.append(0 if y < F(1, 2) else 1)
        y = (2 * y) % 1
    assert [s[1] for s in cyc] == digits


def test_cylinder_pieces_follow_the_word():
    for lo, hi, j in cylinder(HALVES, [0, 1]):
        mid = (lo + hi) / 2
        if lo < hi:
            assert mid < F(1, 2) and (2 * mid) % 1 >= F(1, 2)


def test_fixed_points_of_words():
    assert fixed_points(HALVES, [0, 1]) == [F(0), F(1, 3)]
    assert F(1, 7) in fixed_points(HALVES, [0, 0, 1])


def test_preimages_along_a_word():
    out = preimages_along(HALVES, [0, 1], F(1, 3))
    assert out == [F(1, 3)]
    assert all(iterate(x, 2) == F(1, 3) for x in out)


def test_basilica_classes():
    part = critical_partition(F(1, 3))
    assert periodic_class(part, F(1, 3)) == [F(1, 3), F(2, 3)]
    assert preperiodic_class(part, F(1, 6)) == [F(1, 6), F(5, 6)]
    assert same_class(part, F(1, 3), F(2, 3))
    assert not same_class(part, F(1, 3), F(1, 6))

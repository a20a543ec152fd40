"""Combinatorics of quadratic invariant laminations under angle doubling."""

__version__ = "0.1.0"

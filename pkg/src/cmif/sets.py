"""Finite unions of closed intervals with rational endpoints."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .scalar import Q, fmt_rational


@dataclass(frozen=True)
class ClosedSet1D:
    """Disjoint closed components ``[lo, hi]`` in increasing order (points have lo == hi).

    The empty set is allowed; it represents one-sided limits at ambient endpoints.
    """

    components: tuple[tuple[Fraction, Fraction], ...] = ()

    @staticmethod
    def of(pieces: Iterable) -> "ClosedSet1D":
        """Normalize arbitrary closed pieces: sort, then merge overlapping or touching ones."""
        items = []
        for piece in pieces:
            if isinstance(piece, tuple):
                lo, hi = Q(piece[0]), Q(piece[1])
            else:
                lo = hi = Q(piece)
            if lo > hi:
                lo, hi = hi, lo
            items.append((lo, hi))
        items.sort()
        merged: list[list[Fraction]] = []
        for lo, hi in items:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return ClosedSet1D(tuple((lo, hi) for lo, hi in merged))

    @staticmethod
    def point(v) -> "ClosedSet1D":
        return ClosedSet1D.of([Q(v)])

    @staticmethod
    def interval(lo, hi) -> "ClosedSet1D":
        return ClosedSet1D.of([(Q(lo), Q(hi))])

    @property
    def is_empty(self) -> bool:
        return not self.components

    @property
    def is_interval(self) -> bool:
        """Exactly one component (a point counts)."""
        return len(self.components) == 1

    @property
    def is_singleton(self) -> bool:
        return self.is_interval and self.components[0][0] == self.components[0][1]

    def min(self) -> Fraction:
        return self.components[0][0]

    def max(self) -> Fraction:
        return self.components[-1][1]

    def __contains__(self, v) -> bool:
        v = Q(v)
        return any(lo <= v <= hi for lo, hi in self.components)

    def union(self, other: "ClosedSet1D") -> "ClosedSet1D":
        return ClosedSet1D.of(list(self.components) + list(other.components))

    def issubset(self, other: "ClosedSet1D") -> bool:
        return all(
            any(olo <= lo and hi <= ohi for olo, ohi in other.components)
            for lo, hi in self.components
        )

    def distance_to(self, v: Fraction) -> Fraction:
        return min(
            (Fraction(0) if lo <= v <= hi else min(abs(v - lo), abs(v - hi)))
            for lo, hi in self.components
        )

    def to_text(self) -> str:
        if self.is_empty:
            return "{}"
        parts = []
        for lo, hi in self.components:
            if lo == hi:
                parts.append("{" + fmt_rational(lo) + "}")
            else:
                parts.append(f"[{fmt_rational(lo)}, {fmt_rational(hi)}]")
        return " U ".join(parts)

    def to_json(self) -> list:
        return [[fmt_rational(lo), fmt_rational(hi)] for lo, hi in self.components]

    def __repr__(self) -> str:
        return f"ClosedSet1D({self.to_text()})"


EMPTY = ClosedSet1D()


def directed_distance(a: ClosedSet1D, b: ClosedSet1D) -> Fraction | None:
    """sup over p in a of dist(p, b); None when b is empty and a is not."""
    if a.is_empty:
        return Fraction(0)
    if b.is_empty:
        return None
    worst = Fraction(0)
    bgaps = list(zip(b.components, b.components[1:]))
    for lo, hi in a.components:
        # distance to b is piecewise linear on [lo, hi]; maxima sit at the ends
        # or at midpoints of the holes of b
        candidates = [lo, hi]
        for (_, left_hi), (right_lo, _) in bgaps:
            mid = (left_hi + right_lo) / 2
            if lo <= mid <= hi:
                candidates.append(mid)
        worst = max(worst, max(b.distance_to(c) for c in candidates))
    return worst


def hausdorff_1d(a: ClosedSet1D, b: ClosedSet1D) -> Fraction | None:
    """Hausdorff distance between two closed sets of the line; None if exactly one is empty."""
    if a.is_empty and b.is_empty:
        return Fraction(0)
    d1, d2 = directed_distance(a, b), directed_distance(b, a)
    if d1 is None or d2 is None:
        return None
    return max(d1, d2)

"""Finite-depth approximations of generalized inverse limits.

A depth-n approximation is a finite set of tuples (x_1, ..., x_n) with
x_k in f_k(x_{k+1}) for every k < n, built right to left: seed x_n on a mesh,
then extend through the fibers.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .functions import GeneratedFn, OutOfDomain
from .scalar import Q, fmt_rational

DEFAULT_FAMILY_DEPTH = 16
DEFAULT_MAX_POINTS = 200_000


class DepthMismatch(ValueError):
    pass


@dataclass
class MembershipResult:
    ok: bool
    index: int | None = None  # 1-based k with x_k not in f_k(x_{k+1})

    def __bool__(self) -> bool:
        return self.ok


def _bondings(fs, count: int) -> list:
    if isinstance(fs, (list, tuple)):
        if len(fs) < count:
            raise DepthMismatch(f"need {count} bonding functions, got {len(fs)}")
        return list(fs)
    return [fs] * count


def membership_check(fs, x) -> MembershipResult:
    x = tuple(Q(v) for v in x)
    if len(x) < 2:
        raise ValueError("tuple needs at least two coordinates")
    fs = _bondings(fs, len(x) - 1)
    for k in range(len(x) - 1):
        try:
            ok = x[k] in fs[k].evaluate(x[k + 1])
        except OutOfDomain:
            ok = False
        if not ok:
            return MembershipResult(False, k + 1)
    return MembershipResult(True)


@dataclass
class DepthNApprox:
    depth: int
    points: list
    resolution: Fraction
    family_depth: int = DEFAULT_FAMILY_DEPTH
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for p in self.points:
            w.writerow([fmt_rational(v) for v in p])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str, resolution=0, family_depth: int = DEFAULT_FAMILY_DEPTH) -> "DepthNApprox":
        rows = [tuple(Q(v) for v in row) for row in csv.reader(io.StringIO(text)) if row]
        depths = {len(r) for r in rows}
        if len(depths) > 1:
            raise DepthMismatch("rows have different lengths")
        depth = depths.pop() if depths else 0
        return DepthNApprox(depth, rows, Q(resolution), family_depth)


def _mesh(lo: Fraction, hi: Fraction, step: Fraction, interior: bool) -> list[Fraction]:
    """Points of lo + j*step strictly inside (lo, hi), plus the midpoint, when ``interior``."""
    out = []
    if not interior:
        out.append(lo)
    t = lo + step
    while t < hi:
        out.append(t)
        t += step
    if interior:
        out.append((lo + hi) / 2)
    else:
        out.append(hi)
    return out


def seed_points(f, resolution: Fraction, family_depth: int = DEFAULT_FAMILY_DEPTH) -> list[Fraction]:
    """Mesh on the domain of ``f``: partition points and gap meshes, or a uniform mesh plus breakpoints."""
    if isinstance(f, GeneratedFn):
        P = f.partition
        pts = {v for v, _ in P.order.points(family_depth)}
        for gap in P.order.gap_list(family_depth):
            pts.update(_mesh(P.value(gap.left), P.value(gap.right), resolution, True))
        return sorted(pts)
    lo, hi = f.domain
    return sorted(set(_mesh(lo, hi, resolution, False)) | set(f.breakpoints()))


def _fiber_samples(fiber, resolution: Fraction) -> list[Fraction]:
    out = []
    for lo, hi in fiber.components:
        if lo == hi:
            out.append(lo)
        else:
            out.extend(_mesh(lo, hi, resolution, False))
    return out


def approximate(
    fs,
    n: int,
    resolution,
    family_depth: int = DEFAULT_FAMILY_DEPTH,
    max_points: int = DEFAULT_MAX_POINTS,
) -> DepthNApprox:
    """Backward propagation from a mesh on the last coordinate."""
    if n < 2:
        raise ValueError("depth must be at least 2")
    res = Q(resolution)
    if res <= 0:
        raise ValueError("resolution must be positive")
    fs = _bondings(fs, n - 1)
    tuples = [(t,) for t in seed_points(fs[n - 2], res, family_depth)]
    truncated = False
    for k in range(n - 2, -1, -1):
        nxt = []
        fiber_cache: dict = {}
        for tup in tuples:
            head = tup[0]
            if head not in fiber_cache:
                fiber_cache[head] = _fiber_samples(fs[k].evaluate(head), res)
            for y in fiber_cache[head]:
                nxt.append((y,) + tup)
                if len(nxt) >= max_points:
                    truncated = True
                    break
            if truncated:
                break
        tuples = nxt
    return DepthNApprox(n, sorted(set(tuples)), res, family_depth, truncated)


def _max_dist(a: tuple, b: tuple) -> Fraction:
    return max(abs(u - v) for u, v in zip(a, b))


class _Grid:
    """Integer points bucketed in cubes of side ``cell`` for exact nearest-neighbour search."""

    def __init__(self, points: list, cell: int):
        self.cell = cell
        self.cells: dict = {}
        for p in points:
            self.cells.setdefault(self.key(p), []).append(p)
        self.dim = len(points[0])
        self._rings: dict = {}

    def key(self, p: tuple) -> tuple:
        return tuple(v // self.cell for v in p)

    def ring(self, center: tuple, r: int):
        if r not in self._rings:
            self._rings[r] = [
                off for off in itertools.product(range(-r, r + 1), repeat=self.dim) if max(map(abs, off), default=0) == r
            ]
        for off in self._rings[r]:
            yield tuple(c + o for c, o in zip(center, off))

    def nearest(self, a: tuple, enough: int) -> int:
        """Distance from a to the grid points, or any value <= ``enough`` once one is found."""
        center = self.key(a)
        best = None
        r = 0
        while True:
            if (2 * r + 1) ** self.dim > 4 * len(self.cells):
                # the ring is larger than the occupied grid: finish by brute force
                for pts in self.cells.values():
                    for q in pts:
                        d = max(abs(u - v) for u, v in zip(a, q))
                        if best is None or d < best:
                            best = d
                return best
            for k in self.ring(center, r):
                for q in self.cells.get(k, ()):
                    d = max(abs(u - v) for u, v in zip(a, q))
                    if best is None or d < best:
                        best = d
            # unvisited points are at least r cells away in some coordinate
            if best is not None and (best <= r * self.cell or best <= enough):
                return best
            r += 1


def _directed(src: list, dst: list, cell: int) -> int:
    grid = _Grid(dst, cell)
    worst = 0
    for a in src:
        worst = max(worst, grid.nearest(a, worst))
    return worst


def hausdorff_distance(cloud_a, cloud_b) -> Fraction:
    """Hausdorff distance in the maximum metric, exact.

    Coordinates are scaled to integers over their common denominator, so the
    search runs on ints and the result is still exact.
    """
    A = [tuple(Q(v) for v in p) for p in getattr(cloud_a, "points", cloud_a)]
    B = [tuple(Q(v) for v in p) for p in getattr(cloud_b, "points", cloud_b)]
    if not A or not B:
        raise ValueError("clouds must be nonempty")
    if {len(p) for p in A} != {len(p) for p in B} or len({len(p) for p in A}) != 1:
        raise DepthMismatch("clouds have different depths")
    n = len(A[0])
    den = math.lcm(*{v.denominator for p in A + B for v in p})
    Ai = [tuple(v.numerator * (den // v.denominator) for v in p) for p in A]
    Bi = [tuple(v.numerator * (den // v.denominator) for v in p) for p in B]
    lo = [min(p[k] for p in Ai + Bi) for k in range(n)]
    span = max(max(p[k] for p in Ai + Bi) - lo[k] for k in range(n))
    # about one point per occupied cell on average
    per_axis = max(1, round(max(len(A), len(B)) ** (1 / n)))
    cell = max(1, -(-span // per_axis))
    return Fraction(max(_directed(Ai, Bi, cell), _directed(Bi, Ai, cell)), den)


@dataclass
class TransportResult:
    ok: bool
    checked: int
    witness: dict | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "witness": self.witness}


def transport_test(chain, approx: DepthNApprox, gs) -> TransportResult:
    """H maps every tuple of the approximation into the inverse limit of the g's."""
    from .conjugacy import apply_H

    n = approx.depth
    if n > len(chain.maps):
        raise DepthMismatch(f"chain has {len(chain.maps)} maps, approximation depth is {n}")
    for count, x in enumerate(approx.points, 1):
        y = apply_H(chain, x, n)
        res = membership_check(gs, y)
        if not res.ok:
            return TransportResult(
                False,
                count,
                {"x": [fmt_rational(v) for v in x], "H(x)": [fmt_rational(v) for v in y], "failing_index": res.index},
            )
    return TransportResult(True, len(approx.points))

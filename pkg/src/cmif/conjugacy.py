"""Conjugating homeomorphism chains h_1, h_2, ... with h_i o f_i = g_i o h_{i+1}.

h_1 agrees with tau on A and is affine on every gap.  h_{i+1} agrees with tau
on A and on a gap (a, a') of A is (g_i restricted to (tau(a), tau(a')))^-1 o
h_i o f_i.  Maps are evaluated lazily and exactly; breakpoints ("knots") are
materialized only for verification and reporting.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

from .functions import GeneratedFn
from .partition import DEFAULT_DEPTH, Gap
from .pattern import PatternMap, check_same_pattern
from .scalar import Q, fmt_rational
from .sets import ClosedSet1D

KNOT_CAP = 50_000


class PatternMismatch(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class PiecewiseHomeo:
    """An increasing homeomorphism [x, y] -> [x', y'] that equals tau on A."""

    def __init__(self, tau: PatternMap, level: int = 1, prev: "PiecewiseHomeo | None" = None, f=None, g=None):
        self.tau = tau
        self.level = level
        self.prev = prev
        self.f = f
        self.g = g
        self._cache: dict = {}
        self._knots: dict = {}
        self.perturbation: tuple | None = None  # (gap, delta): adds delta * (t - a) on the gap

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.tau.source.ambient

    @property
    def codomain(self) -> tuple[Fraction, Fraction]:
        return self.tau.target.ambient

    def image_gap(self, gap: Gap) -> Gap:
        return Gap(self.tau.apply(gap.left), self.tau.apply(gap.right))

    def __call__(self, t) -> Fraction:
        t = Q(t)
        if t in self._cache:
            return self._cache[t]
        P = self.tau.source
        kind, where = P.locate(t)
        if kind == "point":
            out = self.tau.target.value(self.tau.apply(where))
        else:
            out = self._on_gap(t, where)
            if self.perturbation is not None and self.perturbation[0] == where:
                out += self.perturbation[1] * (t - P.value(where.left))
        self._cache[t] = out
        return out

    def _on_gap(self, t: Fraction, gap: Gap) -> Fraction:
        P, T = self.tau.source, self.tau.target
        tg = self.image_gap(gap)
        if self.prev is None:
            a, b = P.value(gap.left), P.value(gap.right)
            ta, tb = T.value(tg.left), T.value(tg.right)
            return ta + (t - a) * (tb - ta) / (b - a)
        slope, icpt = self.f.gap_affine(gap)
        target = self.prev(slope * t + icpt)
        gs, gi = self.g.gap_affine(tg)
        return (target - gi) / gs

    def inverse_value(self, s) -> Fraction:
        """h^-1(s) by bisection on the materialized knots, then exact affine solve."""
        s = Q(s)
        ks = self.knots(DEFAULT_DEPTH)
        vals = [self(k) for k in ks]
        lo, hi = 0, len(ks) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if vals[mid] <= s:
                lo = mid
            else:
                hi = mid
        a, b, va, vb = ks[lo], ks[hi], vals[lo], vals[hi]
        return a + (s - va) * (b - a) / (vb - va)

    # -- knots ------------------------------------------------------------------

    def knots(self, depth: int = DEFAULT_DEPTH, cap: int = KNOT_CAP) -> list[Fraction]:
        """Sorted breakpoints on the materialized part of the domain, collinear ones merged."""
        key = (depth, cap)
        if key in self._knots:
            return self._knots[key]
        P = self.tau.source
        pts = {v for v, _ in P.order.points(depth)}
        if self.prev is not None:
            inner = self.prev.knots(depth, cap)
            for gap in P.order.gap_list(depth):
                pts.update(self.gap_knots(gap, inner))
                if len(pts) > cap:
                    raise RuntimeError(f"more than {cap} knots at level {self.level}")
        if self.perturbation is not None:
            g = self.perturbation[0]
            pts.update((P.value(g.left), P.value(g.right)))
        ks = sorted(pts)
        out = self._merge(ks)
        self._knots[key] = out
        return out

    def gap_knots(self, gap: Gap, inner: list[Fraction]) -> list[Fraction]:
        """Preimages, inside the gap, of the previous map's knots under f."""
        if self.prev is None:
            return []
        slope, icpt = self.f.gap_affine(gap)
        s, e = self.f.gap_images(gap)
        lo, hi = min(s, e), max(s, e)
        i, j = bisect.bisect_right(inner, lo), bisect.bisect_left(inner, hi)
        return [(k - icpt) / slope for k in inner[i:j]]

    def _merge(self, ks: list[Fraction]) -> list[Fraction]:
        if len(ks) <= 2:
            return ks
        vals = [self(k) for k in ks]
        out, ov = [ks[0]], [vals[0]]
        for j in range(1, len(ks) - 1):
            a, va = out[-1], ov[-1]
            b, vb = ks[j + 1], vals[j + 1]
            # drop ks[j] when it lies on the chord from the last kept knot to the next one
            if (vals[j] - va) * (b - a) != (vb - va) * (ks[j] - a):
                out.append(ks[j])
                ov.append(vals[j])
        out.append(ks[-1])
        return out

    def pieces(self, gap: Gap, depth: int = DEFAULT_DEPTH) -> list[tuple]:
        """(lo, hi, slope, intercept) for the affine pieces on a materialized gap."""
        P = self.tau.source
        a, b = P.value(gap.left), P.value(gap.right)
        ks = [a] + [k for k in self.knots(depth) if a < k < b] + [b]
        out = []
        for lo, hi in zip(ks, ks[1:]):
            m = (lo + hi) / 2
            # one-sided values at the ends come from the affine piece, not the endpoint
            vm, vq = self(m), self((3 * lo + hi) / 4)
            slope = (vm - vq) / (m - (3 * lo + hi) / 4)
            out.append((lo, hi, slope, vm - slope * m))
        return out

    def perturbed(self, gap: Gap, delta) -> "PiecewiseHomeo":
        """Copy whose slope on ``gap`` is changed by ``delta`` (for negative tests)."""
        h = PiecewiseHomeo(self.tau, self.level, self.prev, self.f, self.g)
        h.perturbation = (gap, Q(delta))
        return h

    def check_homeomorphism(self, depth: int = DEFAULT_DEPTH) -> list[str]:
        """Strictly increasing, continuous at every knot, ends to ends (on the materialized part)."""
        problems = []
        ks = self.knots(depth)
        x, y = self.domain
        if self(x) != self.codomain[0] or self(y) != self.codomain[1]:
            problems.append("ambient endpoints are not mapped to ambient endpoints")
        vals = [self(k) for k in ks]
        for (k1, v1), (k2, v2) in zip(zip(ks, vals), zip(ks[1:], vals[1:])):
            if v2 <= v1:
                problems.append(f"not increasing on [{fmt_rational(k1)}, {fmt_rational(k2)}]")
        P = self.tau.source
        for gap in P.order.gap_list(depth):
            for lo, hi, slope, icpt in self.pieces(gap, depth):
                if slope * lo + icpt != self(lo) or slope * hi + icpt != self(hi):
                    problems.append(f"jump inside or at the end of gap {gap} near {fmt_rational(lo)}")
                    break
        return problems


def build_h1(tau: PatternMap) -> PiecewiseHomeo:
    return PiecewiseHomeo(tau)


def _check_gap_correspondence(f: GeneratedFn, g: GeneratedFn, tau: PatternMap, depth: int) -> None:
    T = tau.target
    for gap in f.partition.order.gap_list(depth):
        tg = Gap(tau.apply(gap.left), tau.apply(gap.right))
        if T.next_point(T.value(tg.left)) != tg.right:
            raise PatternMismatch(f"image of gap {gap} is not a gap of the target partition")
        s, e = f.gap_images(gap)
        if (tau.apply_value(s), tau.apply_value(e)) != g.gap_images(tg):
            raise PatternMismatch(f"gap images of {gap} and {tg} do not correspond under tau")


def lift_h(h: PiecewiseHomeo, f: GeneratedFn, g: GeneratedFn, tau: PatternMap, check_depth: int = 8) -> PiecewiseHomeo:
    _check_gap_correspondence(f, g, tau, check_depth)
    return PiecewiseHomeo(tau, h.level + 1, h, f, g)


@dataclass
class SquareResult:
    ok: bool
    index: int
    checked: int
    witness: dict | None = None

    def to_json(self) -> dict:
        return {"square": self.index, "ok": self.ok, "checked_points": self.checked, "witness": self.witness}


def _image(h: PiecewiseHomeo, s: ClosedSet1D) -> ClosedSet1D:
    return ClosedSet1D.of([(h(lo), h(hi)) for lo, hi in s.components])


def verify_commuting(
    h_i: PiecewiseHomeo, f: GeneratedFn, g: GeneratedFn, h_next: PiecewiseHomeo, depth: int = DEFAULT_DEPTH, index: int = 0
) -> SquareResult:
    """Exact check of h_i o f = g o h_next at every knot and every midpoint between knots.

    Both sides are affine between consecutive knots of h_next, so agreement at
    knots and midpoints is equality on every materialized piece.
    """
    P = f.partition
    ks = set(h_next.knots(depth))
    if h_next.perturbation is not None:
        gp = h_next.perturbation[0]
        ks.update((P.value(gp.left), P.value(gp.right)))
    ks = sorted(ks)
    tests = list(ks) + [(a + b) / 2 for a, b in zip(ks, ks[1:])]
    for t in tests:
        lhs = _image(h_i, f.evaluate(t))
        w = h_next(t)
        rhs = g.evaluate(w)
        if lhs != rhs:
            kind, where = P.locate(t)
            return SquareResult(
                False,
                index,
                len(tests),
                {"t": fmt_rational(t), "where": str(where), "h_f": lhs.to_text(), "g_h": rhs.to_text()},
            )
    return SquareResult(True, index, len(tests))


@dataclass
class HomeoChain:
    maps: list
    fs: list
    gs: list
    tau: PatternMap
    squares: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.squares)

    def summary(self, depth: int = DEFAULT_DEPTH) -> dict:
        rows = []
        for h in self.maps:
            ks = h.knots(depth)
            rows.append({"level": h.level, "knots": len(ks)})
        return {
            "format": "cmif-chain/1",
            "tau": self.tau.to_json(),
            "length": len(self.maps),
            "maps": rows,
            "squares": [s.to_json() for s in self.squares],
            "all_squares_commute": self.ok,
        }


def _as_list(x, m: int) -> list:
    if isinstance(x, (list, tuple)):
        if len(x) < m:
            raise LengthMismatch(f"need {m} bonding functions, got {len(x)}")
        return list(x[:m])
    return [x] * m


def build_chain(fs, gs, tau: PatternMap, m: int, depth: int = DEFAULT_DEPTH, check_pattern: bool = True) -> HomeoChain:
    """h_1 .. h_{m+1} with every square h_i o f_i = g_i o h_{i+1} verified."""
    fs, gs = _as_list(fs, m), _as_list(gs, m)
    if check_pattern:
        seen = set()
        for f, g in zip(fs, gs):
            if (id(f), id(g)) in seen:
                continue
            seen.add((id(f), id(g)))
            res = check_same_pattern(f, g, tau)
            if not res.ok:
                raise PatternMismatch(f"functions do not follow the same pattern under tau: {res.violations[:3]}")
    maps = [build_h1(tau)]
    for f, g in zip(fs, gs):
        maps.append(lift_h(maps[-1], f, g, tau))
    chain = HomeoChain(maps, fs, gs, tau)
    chain.squares = [verify_commuting(maps[i], fs[i], gs[i], maps[i + 1], depth, i + 1) for i in range(m)]
    return chain


def apply_H(chain: HomeoChain, x, n: int | None = None) -> tuple:
    x = tuple(Q(v) for v in x)
    n = len(x) if n is None else n
    if len(x) != n:
        raise LengthMismatch(f"tuple has {len(x)} coordinates, expected {n}")
    if n > len(chain.maps):
        raise LengthMismatch(f"chain has only {len(chain.maps)} maps")
    return tuple(h(v) for h, v in zip(chain.maps, x))

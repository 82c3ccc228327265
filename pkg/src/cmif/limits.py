"""One-sided set-valued limits.

``lim_up(f, a)`` is the set of second coordinates of cluster points of the
graph approached from the left of ``a``; ``lim_down`` from the right.  Balls
are taken in the maximum metric on the square.  Both are empty at the
corresponding ambient endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .functions import (
    CheckResult,
    FiniteGraph,
    GeneratedFn,
    OutOfDomain,
    SetValuedFn,
    _first_missing,
    _witness,
)
from .partition import DEFAULT_DEPTH, Gap, Tail
from .scalar import GeomExpr, Q, fmt_rational
from .sets import EMPTY, ClosedSet1D

UP, DOWN = "up", "down"


@dataclass(frozen=True)
class SideLimit:
    side: str
    at: Fraction
    value: ClosedSet1D

    def to_json(self) -> dict:
        return {"side": self.side, "at": fmt_rational(self.at), "value": self.value.to_json()}


def _check_side(side: str) -> str:
    if side not in (UP, DOWN):
        raise ValueError(f"side must be 'up' or 'down', not {side!r}")
    return side


def lim(f: SetValuedFn, a, side: str) -> ClosedSet1D:
    a = Q(a)
    _check_side(side)
    lo, hi = f.domain
    if not lo <= a <= hi:
        raise OutOfDomain(f"{fmt_rational(a)} outside the domain")
    if (side == UP and a == lo) or (side == DOWN and a == hi):
        return EMPTY
    if isinstance(f, GeneratedFn):
        return _generated_lim(f, a, side)
    return _graph_lim(f, a, side)


def lim_up(f: SetValuedFn, a) -> ClosedSet1D:
    return lim(f, a, UP)


def lim_down(f: SetValuedFn, a) -> ClosedSet1D:
    return lim(f, a, DOWN)


def side_limit(f: SetValuedFn, a, side: str) -> SideLimit:
    return SideLimit(side, Q(a), lim(f, a, side))


# -- finite graphs -------------------------------------------------------------


def _graph_lim(f: FiniteGraph, a: Fraction, side: str) -> ClosedSet1D:
    def reaches(x0: Fraction, x1: Fraction) -> bool:
        return x0 < a <= x1 if side == UP else x0 <= a < x1

    pieces = []
    for seg in f.segments:
        if not seg.vertical and reaches(seg.x0, seg.x1):
            y = seg.y_at(a)
            pieces.append((y, y))
    for box in f.boxes:
        if reaches(box.x0, box.x1):
            pieces.append((box.y0, box.y1))
    for fam in f.families:
        for seg in fam.members_touching(a):
            if not seg.vertical and reaches(seg.x0, seg.x1):
                y = seg.y_at(a)
                pieces.append((y, y))
        if fam.limit_x == a and fam.approach == ("below" if side == UP else "above"):
            pieces.append(fam.limit_y)
    return ClosedSet1D.of(pieces)


# -- generated functions -------------------------------------------------------


def tail_limit(f: GeneratedFn, tail: Tail) -> ClosedSet1D:
    """Cluster values at the tail's anchor from the tail side, in closed form."""
    pieces = []
    for s in range(tail.period):
        st, en = f.tail_gap_refs(tail, s)
        pieces.append((f.sym_expr(st).limit(), f.sym_expr(en).limit()))
        u, v = f.tail_value_refs(tail, s)
        pieces.append((f.sym_expr(u).limit(), f.sym_expr(v).limit()))
    return ClosedSet1D.of(pieces)


def _generated_lim(f: GeneratedFn, a: Fraction, side: str) -> ClosedSet1D:
    P = f.partition
    kind, where = P.locate(a)
    if kind == "gap":
        slope, icpt = f.gap_affine(where)
        return ClosedSet1D.point(slope * a + icpt)
    tail_side = "below" if side == UP else "above"
    if P.accumulates_from(a, tail_side):
        return tail_limit(f, P.order.tails[(P.explicit_at(a), tail_side)])
    if side == UP:
        _, end = f.gap_images(Gap(P.prev_point(a), where))
        return ClosedSet1D.point(end)
    start, _ = f.gap_images(Gap(where, P.next_point(a)))
    return ClosedSet1D.point(start)


def first_failing_level(expr: GeomExpr, start: int, bad) -> int | None:
    """Smallest L >= start where ``bad(sign(expr.at(L)))``, when one exists."""
    signs = expr.signs_from(start)
    if not any(bad(s) for s in signs):
        return None
    L = start
    while True:
        v = expr.at(L)
        if bad((v > 0) - (v < 0)):
            return L
        L += 1


def generated_closed_graph(f: GeneratedFn, depth: int = DEFAULT_DEPTH) -> CheckResult:
    """Both one-sided limits lie in f(a) for every partition point a.

    Tail members are covered symbolically from the first rule-governed level,
    and concretely for the first ``depth`` levels.
    """
    P = f.partition
    witnesses = []
    for val, ref in P.order.points(depth):
        fa = f.evaluate(val)
        for side in (UP, DOWN):
            lv = lim(f, val, side)
            if not lv.issubset(fa):
                miss = next(p for lo, hi in lv.components for p in (lo, hi) if p not in fa)
                witnesses.append(_witness(val, miss, f"lim_{side} at {ref} is not contained in f({ref})"))
    for tail in P.order.tails.values():
        start = f.symbolic_start(tail)
        for s in range(tail.period):
            u, v = (f.sym_expr(r) for r in f.tail_value_refs(tail, s))
            for side, r in f.tail_limit_refs(tail, s).items():
                e = f.sym_expr(r)
                for diff, what in ((e - u, "below"), (v - e, "above")):
                    L = first_failing_level(diff, start, lambda sg: sg < 0)
                    if L is not None:
                        m = tail.member(L, s)
                        witnesses.append(
                            _witness(P.value(m), e.at(L), f"lim_{side} at {m} lies {what} f({m}) (tail rule)")
                        )
    return CheckResult(not witnesses, witnesses)


# -- sampling oracle -------------------------------------------------------------


@dataclass
class OracleSample:
    side: str
    at: Fraction
    epsilon: Fraction
    values: list  # sampled second coordinates

    def hull(self) -> ClosedSet1D:
        """Cluster the samples with linkage 2*epsilon; each cluster becomes its hull."""
        if not self.values:
            return EMPTY
        ys = sorted(set(self.values))
        pieces, lo, hi = [], ys[0], ys[0]
        for y in ys[1:]:
            if y - hi <= 2 * self.epsilon:
                hi = y
            else:
                pieces.append((lo, hi))
                lo = hi = y
        pieces.append((lo, hi))
        return ClosedSet1D.of(pieces)


def _neighbour_distance(f: SetValuedFn, a: Fraction, side: str) -> Fraction | None:
    sgn = -1 if side == UP else 1
    if isinstance(f, GeneratedFn):
        P = f.partition
        if P.is_point_of(a) is None:
            return None
        q = P.prev_point(a) if side == UP else P.next_point(a)
        return abs(P.value(q) - a) if q is not None else None
    near = [abs(x - a) for x in f.breakpoints() if (x - a) * sgn > 0]
    return min(near) if near else None


_GOLDEN = Fraction(6180339887, 10**10)


def lim_sampling_oracle(
    f: SetValuedFn,
    a,
    side: str,
    epsilon,
    shells: range = range(20, 61),
    per_shell: int = 24,
) -> OracleSample:
    """Brute-force sample of the graph just to one side of ``a``.

    Abscissae z = a -+ w * 2**-k * (1 + u) for k in ``shells``, with ``per_shell``
    offsets u in [0, 1) taken from a golden-ratio sequence that keeps running
    across shells, so self-similar partitions are not sampled at the same
    relative spots in every shell.  Fibers that are intervals are sampled at
    step epsilon/2 including both ends.
    Used only as a test oracle for :func:`lim_up` / :func:`lim_down`.
    """
    a, eps = Q(a), Q(epsilon)
    _check_side(side)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    lo, hi = f.domain
    sample = OracleSample(side, a, eps, [])
    if (side == UP and a == lo) or (side == DOWN and a == hi):
        return sample
    w = min(Fraction(1, 10), eps)
    d = _neighbour_distance(f, a, side)
    if d is not None:
        w = min(w, d)
    sgn = -1 if side == UP else 1
    count = 0
    for k in shells:
        for _ in range(per_shell):
            u = (count * _GOLDEN) % 1
            count += 1
            z = a + sgn * w * Fraction(1, 2**k) * (1 + u)
            for clo, chi in f.evaluate(z).components:
                y = clo
                while y < chi:
                    sample.values.append(y)
                    y += eps / 2
                sample.values.append(chi)
    return sample

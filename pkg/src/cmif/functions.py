"""Set-valued interval functions f: I -> 2^I.

Two representations:

* :class:`FiniteGraph` -- a graph given as finitely many closed segments and
  axis-aligned boxes, plus segment families converging to a vertical segment
  (enough for the harmonic oscillation example and the non-u.s.c. box example).
* :class:`GeneratedFn` -- a function generated by a Markov partition: an
  interval ``[u, v]`` at every partition point and an affine bijection on every
  gap, the latter given by the images of the gap endpoints.  Rules attached
  to a family apply to every member ``family[n]`` with index-affine references.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .partition import (
    DEFAULT_DEPTH,
    Explicit,
    Gap,
    Literal,
    MarkovPartition,
    Member,
    PointRef,
    Ref,
    Rel,
    Tail,
    bind,
)
from .scalar import Const, GeomExpr, Q, SeqExpr, fmt_rational, sign
from .sets import ClosedSet1D


class FunctionError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class OutOfDomain(ValueError):
    pass


# ---------------------------------------------------------------------------
# finite graphs


@dataclass(frozen=True)
class GraphSegment:
    """Closed segment from (x0, y0) to (x1, y1) with x0 <= x1; ends may be flagged open."""

    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction
    open0: bool = False
    open1: bool = False

    def __post_init__(self):
        for name in ("x0", "y0", "x1", "y1"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if self.x0 > self.x1:
            x0, y0, x1, y1, o0, o1 = self.x1, self.y1, self.x0, self.y0, self.open1, self.open0
            for k, v in zip(("x0", "y0", "x1", "y1", "open0", "open1"), (x0, y0, x1, y1, o0, o1)):
                object.__setattr__(self, k, v)
        if self.vertical and (self.open0 or self.open1):
            raise ValueError("open ends are only supported on non-vertical segments")

    @property
    def vertical(self) -> bool:
        return self.x0 == self.x1

    def y_at(self, t: Fraction) -> Fraction:
        return self.y0 + (t - self.x0) * (self.y1 - self.y0) / (self.x1 - self.x0)

    def fiber(self, t: Fraction) -> tuple | None:
        if self.vertical:
            return (min(self.y0, self.y1), max(self.y0, self.y1)) if t == self.x0 else None
        if not self.x0 <= t <= self.x1:
            return None
        if (t == self.x0 and self.open0) or (t == self.x1 and self.open1):
            return None
        y = self.y_at(t)
        return (y, y)


@dataclass(frozen=True)
class Box:
    """Filled box [x0, x1] x [y0, y1]; the vertical edges may be open."""

    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction
    open_left: bool = False
    open_right: bool = False

    def __post_init__(self):
        for name in ("x0", "x1", "y0", "y1"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if not (self.x0 < self.x1 and self.y0 <= self.y1):
            raise ValueError("box needs x0 < x1 and y0 <= y1")

    def fiber(self, t: Fraction) -> tuple | None:
        if not self.x0 <= t <= self.x1:
            return None
        if (t == self.x0 and self.open_left) or (t == self.x1 and self.open_right):
            return None
        return (self.y0, self.y1)


@dataclass(frozen=True)
class SegmentFamily:
    """Segments from (x0(n), y0(n)) to (x1(n), y1(n)) for n >= n0.

    Both x-sequences converge to the same abscissa and eventually stay strictly
    on one side of it, so the family accumulates on one vertical segment.
    """

    x0: SeqExpr
    y0: SeqExpr
    x1: SeqExpr
    y1: SeqExpr
    n0: int = 1

    def __post_init__(self):
        if self.x0.limit() != self.x1.limit():
            raise ValueError("segment family must converge to a vertical segment")
        if isinstance(self.x0, Const) or isinstance(self.x1, Const):
            raise ValueError("segment family abscissae must be convergent sequences")
        stable = self.stable_from
        s0, s1 = self.x0.side_sign(stable), self.x1.side_sign(stable)
        if s0 == 0 or s0 != s1:
            raise ValueError("segment family must approach its limit from one side")

    @property
    def limit_x(self) -> Fraction:
        return self.x0.limit()

    @property
    def limit_y(self) -> tuple[Fraction, Fraction]:
        a, b = self.y0.limit(), self.y1.limit()
        return (min(a, b), max(a, b))

    @property
    def stable_from(self) -> int:
        return max(self.n0, self.x0.regular_from(), self.x1.regular_from(), self.y0.regular_from(), self.y1.regular_from())

    @property
    def approach(self) -> str:
        return "below" if self.x0.side_sign(self.stable_from) < 0 else "above"

    def member(self, n: int) -> GraphSegment:
        return GraphSegment(self.x0.at(n), self.y0.at(n), self.x1.at(n), self.y1.at(n))

    def members_touching(self, t: Fraction) -> list[GraphSegment]:
        """Members whose x-range contains t (a finite list)."""
        N = self.stable_from
        out = [s for s in (self.member(n) for n in range(self.n0, N)) if s.x0 <= t <= s.x1]
        L = self.limit_x
        if t == L or (t < L) != (self.approach == "below"):
            return out
        # past N both abscissae move monotonically toward L; a member touches t
        # once one end is within |t - L| and until both ends are strictly inside
        d = abs(t - L)
        first = min(self.x0.first_within(d, N, strict=False), self.x1.first_within(d, N, strict=False))
        stop = max(self.x0.first_within(d, N), self.x1.first_within(d, N))
        out.extend(self.member(n) for n in range(first, stop))
        return out


@dataclass
class FiniteGraph:
    domain: tuple[Fraction, Fraction]
    segments: list = field(default_factory=list)
    boxes: list = field(default_factory=list)
    families: list = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.domain = (Q(self.domain[0]), Q(self.domain[1]))

    @property
    def codomain(self) -> tuple[Fraction, Fraction]:
        return self.domain

    def check_domain(self, t: Fraction) -> Fraction:
        t = Q(t)
        if not self.domain[0] <= t <= self.domain[1]:
            raise OutOfDomain(f"{fmt_rational(t)} outside the domain")
        return t

    def evaluate(self, t) -> ClosedSet1D:
        t = self.check_domain(t)
        pieces = []
        for seg in self.segments:
            f = seg.fiber(t)
            if f is not None:
                pieces.append(f)
        for box in self.boxes:
            f = box.fiber(t)
            if f is not None:
                pieces.append(f)
        for fam in self.families:
            for seg in fam.members_touching(t):
                f = seg.fiber(t)
                if f is not None:
                    pieces.append(f)
        return ClosedSet1D.of(pieces)

    def materialized_segments(self, depth: int) -> list[GraphSegment]:
        out = list(self.segments)
        for fam in self.families:
            out.extend(fam.member(n) for n in range(fam.n0, fam.n0 + depth))
        return out

    def breakpoints(self) -> list[Fraction]:
        """x-coordinates where the finite pieces start or stop (families excluded)."""
        xs = {self.domain[0], self.domain[1]}
        for seg in self.segments:
            xs.update((seg.x0, seg.x1))
        for box in self.boxes:
            xs.update((box.x0, box.x1))
        for fam in self.families:
            xs.add(fam.limit_x)
        return sorted(xs)


# ---------------------------------------------------------------------------
# partition-generated functions


@dataclass(frozen=True)
class LevelRef:
    """Tail reference: member ``family[L + d]`` of a point at tail level L."""

    family: str
    d: int


@dataclass(frozen=True)
class ConstRef:
    ref: Ref


SymRef = LevelRef | ConstRef


class GeneratedFn:
    """Markov-partition generated set-valued function.

    ``values`` maps ``Explicit`` points, concrete ``Member`` overrides and
    family ids (rules) to ``(u, v)`` references.  ``gap_rules`` maps concrete
    ``Gap`` overrides and family ids to ``(start, end)``: the one-sided limits
    of the affine gap piece at the gap's left and right endpoint.  A family
    rule governs the gap on the limit side of each member: right of members of
    increasing families, left of members of decreasing ones.
    """

    def __init__(self, partition: MarkovPartition, values: dict, gap_rules: dict, name: str = ""):
        self.partition = partition
        self.values = dict(values)
        self.gap_rules = dict(gap_rules)
        self.name = name
        problems = self._structure_problems()
        if problems:
            raise FunctionError(problems)

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.partition.ambient

    @property
    def codomain(self) -> tuple[Fraction, Fraction]:
        return self.partition.ambient

    # -- structural validation ---------------------------------------------

    def _ref_problems(self, ref: Ref, owner: str | None, n_first: int | None, where: str, covered) -> list[str]:
        P = self.partition
        out = []
        if isinstance(ref, Explicit) and ref.id not in P.explicit:
            out.append(f"{where}: unknown explicit point {ref.id}")
        elif isinstance(ref, (Member, Rel)) and ref.family not in P.families:
            out.append(f"{where}: unknown family {ref.family}")
        elif isinstance(ref, Member) and ref.index < P.families[ref.family].n0:
            out.append(f"{where}: {ref} below the family's first index")
        elif isinstance(ref, Literal) and not P.x <= ref.value <= P.y:
            out.append(f"{where}: {ref} outside the ambient interval")
        elif isinstance(ref, Rel):
            if owner is None:
                out.append(f"{where}: relative reference {ref} outside a family rule")
            else:
                n = n_first
                need = P.families[ref.family].n0
                while n + ref.offset < need:
                    if not covered(n):
                        out.append(f"{where}: {ref} undefined for {owner}[{n}] (add an override)")
                        break
                    n += 1
        return out

    def _structure_problems(self) -> list[str]:
        P = self.partition
        out = []
        for eid in P.explicit:
            if Explicit(eid) not in self.values:
                out.append(f"missing value for explicit:{eid}")
        for fid, fam in P.families.items():
            if fid not in self.values:
                out.append(f"missing value rule for family {fid}")
            if fid not in self.gap_rules:
                out.append(f"missing gap rule for family {fid}")
        for key, refs in self.values.items():
            owner = key if isinstance(key, str) else None
            n_first = P.families[key].n0 if owner in P.families else None
            covered = lambda n, fid=owner: Member(fid, n) in self.values
            for r in refs:
                out.extend(self._ref_problems(r, owner, n_first, f"value of {key}", covered))
        for key, refs in self.gap_rules.items():
            owner = key if isinstance(key, str) else None
            n_first = P.families[key].n0 if owner in P.families else None
            for r in refs:
                covered = lambda n, fid=owner: self._gap_override_for(Member(fid, n)) is not None
                out.extend(self._ref_problems(r, owner, n_first, f"gap rule of {key}", covered))
        if not out:
            for gap in P.gaps().prefix:
                try:
                    self.gap_refs(gap)
                except KeyError:
                    out.append(f"missing gap rule for {gap}")
        return out

    def _gap_override_for(self, m: Member):
        fam = self.partition.families[m.family]
        v = fam.value(m.index)
        if fam.side == "below":
            other = self.partition.next_point(v)
            return self.gap_rules.get(Gap(m, other))
        other = self.partition.prev_point(v)
        return self.gap_rules.get(Gap(other, m))

    # -- concrete lookups --------------------------------------------------

    def value_refs(self, p: PointRef) -> tuple[Ref, Ref]:
        if p in self.values:
            return self.values[p]
        if isinstance(p, Member):
            u, v = self.values[p.family]
            return bind(u, p.index), bind(v, p.index)
        raise KeyError(p)

    def gap_refs(self, gap: Gap) -> tuple[Ref, Ref]:
        if gap in self.gap_rules:
            return self.gap_rules[gap]
        P = self.partition
        left, right = gap.left, gap.right
        if isinstance(left, Member) and P.families[left.family].side == "below":
            s, e = self.gap_rules[left.family]
            return bind(s, left.index), bind(e, left.index)
        if isinstance(right, Member) and P.families[right.family].side == "above":
            s, e = self.gap_rules[right.family]
            return bind(s, right.index), bind(e, right.index)
        raise KeyError(gap)

    def value_at_point(self, p: PointRef) -> tuple[Fraction, Fraction]:
        u, v = self.value_refs(p)
        return self.partition.value(u), self.partition.value(v)

    def gap_images(self, gap: Gap) -> tuple[Fraction, Fraction]:
        s, e = self.gap_refs(gap)
        return self.partition.value(s), self.partition.value(e)

    def gap_affine(self, gap: Gap) -> tuple[Fraction, Fraction]:
        """(slope, intercept) of the gap piece."""
        P = self.partition
        a, b = P.value(gap.left), P.value(gap.right)
        s, e = self.gap_images(gap)
        slope = (e - s) / (b - a)
        return slope, s - slope * a

    def evaluate(self, t) -> ClosedSet1D:
        t = Q(t)
        if not self.domain[0] <= t <= self.domain[1]:
            raise OutOfDomain(f"{fmt_rational(t)} outside the domain")
        kind, where = self.partition.locate(t)
        if kind == "point":
            u, v = self.value_at_point(where)
            return ClosedSet1D.of([(u, v)])
        slope, icpt = self.gap_affine(where)
        return ClosedSet1D.point(slope * t + icpt)

    def truncate(self, depth: int = DEFAULT_DEPTH) -> FiniteGraph:
        """Closed segments for every materialized vertical value and gap piece."""
        P = self.partition
        segs = []
        for val, ref in P.order.points(depth):
            u, v = self.value_at_point(ref)
            if u != v:
                segs.append(GraphSegment(val, u, val, v))
        for gap in P.order.gap_list(depth):
            s, e = self.gap_images(gap)
            segs.append(GraphSegment(P.value(gap.left), s, P.value(gap.right), e))
        return FiniteGraph(self.domain, segs, name=f"{self.name} (depth {depth})")

    # -- symbolic tail lookups ---------------------------------------------

    def _sym(self, ref: Ref, owner: str, level_delta: int, tail: Tail) -> SymRef:
        if isinstance(ref, Rel):
            return LevelRef(ref.family, level_delta - tail.shift[owner] + ref.offset)
        return ConstRef(ref)

    def tail_value_refs(self, tail: Tail, s: int) -> tuple[SymRef, SymRef]:
        """Value rule of tail member (L, s) in terms of L."""
        fid = tail.slots[s]
        u, v = self.values[fid]
        return self._sym(u, fid, 0, tail), self._sym(v, fid, 0, tail)

    def tail_gap_refs(self, tail: Tail, s: int, farther: bool = False) -> tuple[SymRef, SymRef]:
        """(start, end) of the limit-side gap of tail member (L, s), or of its farther neighbour."""
        L, ss = (0, s) if not farther else tail.farther(0, s)
        fid = tail.slots[ss]
        st, en = self.gap_rules[fid]
        return self._sym(st, fid, L, tail), self._sym(en, fid, L, tail)

    def tail_limit_refs(self, tail: Tail, s: int) -> dict:
        """One-sided limits at tail member (L, s): ``{"up": SymRef, "down": SymRef}``."""
        near = self.tail_gap_refs(tail, s)
        far = self.tail_gap_refs(tail, s, farther=True)
        if tail.side == "below":
            return {"up": far[1], "down": near[0]}
        return {"up": near[1], "down": far[0]}

    def symbolic_start(self, tail: Tail) -> int:
        """First level from which the family rules alone describe the tail."""
        P = self.partition
        start = tail.L0 + 1
        for key in self.values:
            if isinstance(key, Member) and key.family in tail.shift:
                start = max(start, key.index + tail.shift[key.family] + 2)
        for key in self.gap_rules:
            if isinstance(key, Gap):
                for end in (key.left, key.right):
                    if isinstance(end, Member) and end.family in tail.shift:
                        start = max(start, end.index + tail.shift[end.family] + 2)
        for s in range(tail.period):
            refs = list(self.tail_value_refs(tail, s)) + list(self.tail_gap_refs(tail, s))
            refs += list(self.tail_gap_refs(tail, s, farther=True))
            for r in refs:
                if isinstance(r, LevelRef):
                    start = max(start, P.families[r.family].n0 - r.d)
        return start

    def sym_expr(self, r: SymRef) -> GeomExpr:
        if isinstance(r, LevelRef):
            return GeomExpr.member(self.partition.families[r.family], r.d)
        return GeomExpr.const(self.partition.value(r.ref))

    def member_expr(self, tail: Tail, s: int) -> GeomExpr:
        fid = tail.slots[s]
        return GeomExpr.member(self.partition.families[fid], -tail.shift[fid])

    # -- convenience constructors -------------------------------------------

    @staticmethod
    def identity(P: MarkovPartition, name: str = "identity") -> "GeneratedFn":
        values: dict = {Explicit(e): (Explicit(e), Explicit(e)) for e in P.explicit}
        gap_rules: dict = {}
        for fid in P.families:
            values[fid] = (Rel(fid, 0), Rel(fid, 0))
        for t in P.order.tails.values():
            for s, fid in enumerate(t.slots):
                q = t.member(*t.nearer(t.L0, s))
                p = t.member(t.L0, s)
                rel_q = Rel(q.family, q.index - p.index)
                gap_rules[fid] = (Rel(fid, 0), rel_q) if t.side == "below" else (rel_q, Rel(fid, 0))
        for gap in P.gaps().prefix:
            gap_rules[gap] = (gap.left, gap.right)
        return GeneratedFn(P, values, gap_rules, name)


SetValuedFn = FiniteGraph | GeneratedFn


def evaluate(f: SetValuedFn, t) -> ClosedSet1D:
    return f.evaluate(t)


# ---------------------------------------------------------------------------
# closed-graph and surjectivity checks


@dataclass
class CheckResult:
    ok: bool
    witnesses: list = field(default_factory=list)
    exact: bool = True

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "exact": self.exact, "witnesses": list(self.witnesses)}


def _first_missing(lo: Fraction, hi: Fraction, have: ClosedSet1D) -> Fraction | None:
    """Some point of [lo, hi] outside ``have`` (preferring lo), or None if covered."""
    if lo not in have:
        return lo
    for clo, chi in have.components:
        if clo <= lo <= chi:
            if chi >= hi:
                return None
            nxt = [c for c, _ in have.components if c > chi]
            upper = min([hi] + nxt)
            return (chi + upper) / 2 if upper > chi else None
    return None


def _witness(x: Fraction, y: Fraction, why: str) -> dict:
    return {"x": fmt_rational(x), "y": fmt_rational(y), "reason": why}


def closed_graph_check(f: SetValuedFn, depth: int = DEFAULT_DEPTH) -> CheckResult:
    """Is the graph closed?  Returns the first missing closure points as witnesses."""
    if isinstance(f, GeneratedFn):
        from .limits import generated_closed_graph

        return generated_closed_graph(f, depth)
    witnesses = []
    for seg in f.segments:
        for flag, x, y in ((seg.open0, seg.x0, seg.y0), (seg.open1, seg.x1, seg.y1)):
            if flag and y not in f.evaluate(x):
                witnesses.append(_witness(x, y, "open segment end is not in the graph"))
    for box in f.boxes:
        for flag, x in ((box.open_left, box.x0), (box.open_right, box.x1)):
            if flag:
                miss = _first_missing(box.y0, box.y1, f.evaluate(x))
                if miss is not None:
                    witnesses.append(_witness(x, miss, "open box edge is not in the graph"))
    for fam in f.families:
        lo, hi = fam.limit_y
        miss = _first_missing(lo, hi, f.evaluate(fam.limit_x))
        if miss is not None:
            witnesses.append(_witness(fam.limit_x, miss, "accumulation segment of a family is not in the graph"))
    return CheckResult(not witnesses, witnesses)


def complement_pieces(lo: Fraction, hi: Fraction, have: ClosedSet1D) -> list[tuple]:
    """[lo, hi] minus a closed set, as (a, b, a_closed, b_closed) pieces."""
    out = []
    cur, cur_closed = lo, True
    for clo, chi in have.components:
        if chi < lo or clo > hi:
            continue
        if clo > cur:
            out.append((cur, clo, cur_closed, False))
        if chi >= cur:
            cur, cur_closed = chi, False
    if cur < hi or (cur == hi and cur_closed):
        out.append((cur, hi, cur_closed, True))
    return [p for p in out if p[0] < p[1] or (p[2] and p[3])]


def _fmt_piece(p: tuple) -> str:
    a, b, ac, bc = p
    return ("[" if ac else "(") + f"{fmt_rational(a)}, {fmt_rational(b)}" + ("]" if bc else ")")


def image_set(f: SetValuedFn, depth: int = DEFAULT_DEPTH) -> ClosedSet1D:
    """Closed union of the materialized images (plus accumulation limits)."""
    pieces = []
    if isinstance(f, GeneratedFn):
        P = f.partition
        for _, ref in P.order.points(depth):
            pieces.append(f.value_at_point(ref))
        for gap in P.order.gap_list(depth):
            pieces.append(f.gap_images(gap))
        return ClosedSet1D.of(pieces)
    for seg in f.materialized_segments(depth):
        pieces.append((seg.y0, seg.y1))
    for box in f.boxes:
        pieces.append((box.y0, box.y1))
    for fam in f.families:
        pieces.append(fam.limit_y)
    return ClosedSet1D.of(pieces)


def surjective_graph_check(f: SetValuedFn, depth: int = DEFAULT_DEPTH) -> CheckResult:
    lo, hi = f.codomain
    missing = complement_pieces(lo, hi, image_set(f, depth))
    return CheckResult(not missing, [{"uncovered": _fmt_piece(p)} for p in missing])

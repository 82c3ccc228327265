"""Countable closed partitions ``A`` of ``[x, y]`` with finite derived set.

A partition is given by finitely many explicit points and geometric families
``alpha + beta * rho**n``.  The :class:`OrderModel` turns that data into a
finite presentation of the order type of ``A``: between consecutive anchors
(accumulation points and ambient endpoints) there is a finite middle part and
at most two tails, one per side, each a periodic interleaving of families.

Tail bookkeeping uses *levels*.  Writing ``|beta| = m * rho**k`` with
``rho < m <= 1``, member ``n`` of a family sits at distance ``m * rho**L``
from its limit where ``L = n + k``.  Within one level the members are ordered
by ``m``; that ordering repeats at every level.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Union

from .scalar import GeometricFamily, Q, first_index_within, fmt_rational

DEFAULT_DEPTH = 64


# ---------------------------------------------------------------------------
# point references


@dataclass(frozen=True, order=True)
class Explicit:
    id: str

    def __str__(self) -> str:
        return f"explicit:{self.id}"


@dataclass(frozen=True, order=True)
class Member:
    family: str
    index: int

    def __str__(self) -> str:
        return f"family:{self.family}[{self.index}]"


@dataclass(frozen=True, order=True)
class Rel:
    """Index-affine reference ``family[n + offset]``; n is the index of the rule's owner."""

    family: str
    offset: int

    def at(self, n: int) -> Member:
        return Member(self.family, n + self.offset)

    def __str__(self) -> str:
        if self.offset == 0:
            return f"family:{self.family}[n]"
        op = "+" if self.offset > 0 else "-"
        return f"family:{self.family}[n{op}{abs(self.offset)}]"


@dataclass(frozen=True, order=True)
class Literal:
    value: Fraction

    def __str__(self) -> str:
        return f"value:{fmt_rational(self.value)}"


Ref = Union[Explicit, Member, Rel, Literal]
PointRef = Union[Explicit, Member]

_REF_RE = re.compile(
    r"^(?:explicit:(?P<eid>[^\s\[\]]+)"
    r"|family:(?P<fid>[^\s\[\]]+)\[(?:(?P<conc>-?\d+)|n\s*(?:(?P<op>[+-])\s*(?P<off>\d+))?)\]"
    r"|value:(?P<val>\S+))$"
)


def parse_ref(text: str) -> Ref:
    m = _REF_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed point reference {text!r}")
    if m["eid"] is not None:
        return Explicit(m["eid"])
    if m["val"] is not None:
        return Literal(Q(m["val"]))
    if m["conc"] is not None:
        return Member(m["fid"], int(m["conc"]))
    off = int(m["off"] or 0)
    return Rel(m["fid"], -off if m["op"] == "-" else off)


def bind(ref: Ref, n: int | None) -> Ref:
    """Substitute the owner index into a relative reference."""
    if isinstance(ref, Rel):
        if n is None:
            raise ValueError(f"relative reference {ref} used without an index")
        return ref.at(n)
    return ref


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    datum: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} [{self.datum}]: {self.message}"


class PartitionError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class NonPeriodicInterleaving(PartitionError):
    pass


@dataclass(frozen=True)
class Gap:
    left: PointRef
    right: PointRef

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


@dataclass(frozen=True)
class Tail:
    """Members of the families converging to ``anchor`` from one side, at levels >= L0."""

    anchor: str
    alpha: Fraction
    side: str  # "below" | "above"
    rho: Fraction
    slots: tuple[str, ...]  # family ids, farthest-from-limit first within a level
    shift: dict  # family id -> k, so that level = index + k
    L0: int

    @property
    def period(self) -> int:
        return len(self.slots)

    def member(self, L: int, s: int) -> Member:
        fam = self.slots[s]
        return Member(fam, L - self.shift[fam])

    def level_slot(self, m: Member) -> tuple[int, int]:
        return m.index + self.shift[m.family], self.slots.index(m.family)

    def farther(self, L: int, s: int) -> tuple[int, int]:
        return (L, s - 1) if s > 0 else (L - 1, self.period - 1)

    def nearer(self, L: int, s: int) -> tuple[int, int]:
        return (L, s + 1) if s + 1 < self.period else (L + 1, 0)


@dataclass(frozen=True)
class GapTemplate:
    """Gaps between tail member (L, slot) and its neighbour toward the limit, L >= L0."""

    tail: Tail
    slot: int

    def concretize(self, L: int) -> Gap:
        p = self.tail.member(L, self.slot)
        q = self.tail.member(*self.tail.nearer(L, self.slot))
        return Gap(p, q) if self.tail.side == "below" else Gap(q, p)

    def __str__(self) -> str:
        t = self.tail
        p = t.member(t.L0, self.slot)
        q = t.member(*t.nearer(t.L0, self.slot))
        dn = q.index - p.index
        rel_p = f"family:{p.family}[n]"
        rel_q = str(Rel(q.family, dn))
        pair = (rel_p, rel_q) if t.side == "below" else (rel_q, rel_p)
        return f"({pair[0]}, {pair[1]}) for n >= {p.index}"


@dataclass
class Segment:
    """Points strictly between two consecutive anchors."""

    left: str
    right: str
    middle: list  # sorted (value, ref)
    above: Tail | None  # tail of the left anchor
    below: Tail | None  # tail of the right anchor

    @property
    def kind(self) -> str:
        if self.above and self.below:
            return "Z"
        if self.below:
            return "omega"
        if self.above:
            return "omega*"
        return "finite"

    def ref_at(self, pos: int) -> PointRef:
        m = len(self.middle)
        if 0 <= pos < m:
            return self.middle[pos][1]
        if pos >= m:
            if not self.below:
                raise IndexError(pos)
            t = self.below
            L, s = divmod(pos - m, t.period)
            return t.member(t.L0 + L, s)
        if not self.above:
            raise IndexError(pos)
        t = self.above
        L, s = divmod(-pos - 1, t.period)
        return t.member(t.L0 + L, s)

    def pos_of(self, ref: PointRef) -> int | None:
        for i, (_, r) in enumerate(self.middle):
            if r == ref:
                return i
        if isinstance(ref, Member):
            if self.below and ref.family in self.below.shift:
                L, s = self.below.level_slot(ref)
                if L >= self.below.L0:
                    return len(self.middle) + (L - self.below.L0) * self.below.period + s
            if self.above and ref.family in self.above.shift:
                L, s = self.above.level_slot(ref)
                if L >= self.above.L0:
                    return -(1 + (L - self.above.L0) * self.above.period + s)
        return None


@dataclass(frozen=True)
class GapStructure:
    prefix: list  # concrete Gaps
    templates: list  # GapTemplates


class MarkovPartition:
    """A validated partition.  Build through :func:`validate_partition`."""

    def __init__(self, ambient, explicit: dict, families: dict):
        self.ambient = (Q(ambient[0]), Q(ambient[1]))
        self.explicit = {str(k): Q(v) for k, v in explicit.items()}
        self.families = {str(k): v for k, v in families.items()}
        self._by_value = {v: k for k, v in self.explicit.items()}

    # -- basic queries -------------------------------------------------------

    @property
    def x(self) -> Fraction:
        return self.ambient[0]

    @property
    def y(self) -> Fraction:
        return self.ambient[1]

    def explicit_at(self, v: Fraction) -> str | None:
        return self._by_value.get(v)

    @property
    def derived_set(self) -> list[Fraction]:
        return sorted({f.alpha for f in self.families.values()})

    def is_accumulation(self, v: Fraction) -> bool:
        return any(f.alpha == v for f in self.families.values())

    def accumulates_from(self, v: Fraction, side: str) -> bool:
        return any(f.alpha == v and f.side == side for f in self.families.values())

    def value(self, ref: Ref) -> Fraction:
        if isinstance(ref, Explicit):
            return self.explicit[ref.id]
        if isinstance(ref, Member):
            return self.families[ref.family].value(ref.index)
        if isinstance(ref, Literal):
            return ref.value
        raise ValueError(f"unbound relative reference {ref}")

    def is_point_of(self, v) -> PointRef | None:
        """Exact membership in A; family membership solves alpha + beta*rho**n = v."""
        v = Q(v)
        eid = self._by_value.get(v)
        if eid is not None:
            return Explicit(eid)
        for fid, fam in self.families.items():
            n = fam.index_of(v)
            if n is not None:
                return Member(fid, n)
        return None

    def canonical(self, ref: Ref) -> PointRef | None:
        """The Explicit/Member name of a bound reference's point, or None if not in A."""
        if isinstance(ref, Explicit):
            return ref if ref.id in self.explicit else None
        if isinstance(ref, Member):
            fam = self.families.get(ref.family)
            return ref if fam is not None and ref.index >= fam.n0 else None
        return self.is_point_of(self.value(ref))

    def label(self, ref: PointRef) -> str:
        return f"{ref}={fmt_rational(self.value(ref))}"

    # -- neighbours ----------------------------------------------------------

    def prev_point(self, v) -> PointRef | None:
        """Largest point of A strictly below v; None if A accumulates at v from below or none exists."""
        return self._neighbour(Q(v), -1)

    def next_point(self, v) -> PointRef | None:
        return self._neighbour(Q(v), +1)

    def _neighbour(self, v: Fraction, direction: int) -> PointRef | None:
        side = "below" if direction < 0 else "above"
        if self.accumulates_from(v, side):
            return None
        best: tuple[Fraction, PointRef] | None = None

        def offer(val: Fraction, ref: PointRef):
            nonlocal best
            if (val - v) * direction <= 0:
                return
            if best is None or abs(val - v) < abs(best[0] - v):
                best = (val, ref)

        for eid, val in self.explicit.items():
            offer(val, Explicit(eid))
        for fid, fam in self.families.items():
            n = self._nearest_index(fam, v, direction)
            if n is not None:
                offer(fam.value(n), Member(fid, n))
        return best[1] if best else None

    @staticmethod
    def _nearest_index(fam: GeometricFamily, v: Fraction, direction: int) -> int | None:
        """Index of the family member nearest to v, strictly on the ``direction`` side of v."""
        # signed distance of v from alpha, measured toward the members' side
        d_v = (v - fam.alpha) if fam.side == "above" else (fam.alpha - v)
        outward = (fam.side == "above") == (direction > 0)
        scale = abs(fam.beta)
        if outward:
            # smallest member distance exceeding d_v: the last index before d_n <= d_v
            if d_v <= 0:
                return None
            n = first_index_within(scale, fam.rho, d_v, fam.n0)
            if n - 1 >= fam.n0 and scale * fam.rho ** (n - 1) == d_v:
                n -= 1
            return n - 1 if n - 1 >= fam.n0 else None
        if d_v <= 0:
            return None
        return first_index_within(scale, fam.rho, d_v, fam.n0)

    def locate(self, t):
        """Classify t as ``("point", ref)`` or ``("gap", Gap)``."""
        t = Q(t)
        if not self.x <= t <= self.y:
            raise ValueError(f"out-of-ambient: {fmt_rational(t)} not in [{fmt_rational(self.x)}, {fmt_rational(self.y)}]")
        ref = self.is_point_of(t)
        if ref is not None:
            return ("point", ref)
        left, right = self.prev_point(t), self.next_point(t)
        return ("gap", Gap(left, right))

    # -- order model ---------------------------------------------------------

    @cached_property
    def order(self) -> "OrderModel":
        return OrderModel.build(self)

    def gaps(self) -> GapStructure:
        return self.order.gap_structure()

    def to_raw(self) -> dict:
        return {
            "ambient": [fmt_rational(self.x), fmt_rational(self.y)],
            "explicit": {k: fmt_rational(v) for k, v in sorted(self.explicit.items(), key=lambda kv: kv[1])},
            "families": {
                fid: {
                    "alpha": fmt_rational(f.alpha),
                    "beta": fmt_rational(f.beta),
                    "rho": fmt_rational(f.rho),
                    "n0": f.n0,
                }
                for fid, f in self.families.items()
            },
        }


def _normalize_scale(beta: Fraction, rho: Fraction) -> tuple[Fraction, int]:
    """Write |beta| = m * rho**k with rho < m <= 1."""
    b = abs(beta)
    k = 0
    while b / rho**k > 1:
        k -= 1
    while b / rho**k <= rho:
        k += 1
    return b / rho**k, k


class OrderModel:
    def __init__(self, partition: MarkovPartition, anchors, tails, segments, prefix):
        self.partition = partition
        self.anchors = anchors  # sorted list of (value, explicit id)
        self.tails = tails  # (anchor id, side) -> Tail
        self.segments = segments
        self.prefix = prefix  # sorted (value, ref) of all non-tail points, anchors included

    @staticmethod
    def build(P: MarkovPartition) -> "OrderModel":
        violations: list[Violation] = []
        groups: dict[tuple[Fraction, str], list[str]] = {}
        for fid, fam in P.families.items():
            groups.setdefault((fam.alpha, fam.side), []).append(fid)
        norms = {fid: _normalize_scale(f.beta, f.rho) for fid, f in P.families.items()}

        tails: dict[tuple[str, str], Tail] = {}
        for (alpha, side), fids in sorted(groups.items()):
            rho = P.families[fids[0]].rho
            ms = {}
            for fid in fids:
                m = norms[fid][0]
                if m in ms:
                    violations.append(
                        Violation("clashing-points", fid, f"family {fid} coincides with family {ms[m]} up to re-indexing")
                    )
                ms[m] = fid
            slots = tuple(sorted(fids, key=lambda f: (-norms[f][0], f)))
            shift = {f: norms[f][1] for f in fids}
            sep = _separation(P, alpha, side, set(fids))
            L0 = max(P.families[f].n0 + shift[f] for f in fids)
            L0 = max(L0, first_index_within(Fraction(1), rho, sep, L0))
            anchor = P.explicit_at(alpha)
            tails[(anchor, side)] = Tail(anchor, alpha, side, rho, slots, shift, L0)
        if violations:
            raise NonPeriodicInterleaving(violations)

        tail_of = {}
        for t in tails.values():
            for f in t.slots:
                tail_of[f] = t
        prefix = [(v, Explicit(eid)) for eid, v in P.explicit.items()]
        for fid, fam in P.families.items():
            t = tail_of[fid]
            for n in range(fam.n0, t.L0 - t.shift[fid]):
                prefix.append((fam.value(n), Member(fid, n)))
        prefix.sort(key=lambda vr: vr[0])
        for (v1, r1), (v2, r2) in zip(prefix, prefix[1:]):
            if v1 == v2:
                violations.append(Violation("clashing-points", str(r2), f"{r1} and {r2} both equal {fmt_rational(v1)}"))
        if violations:
            raise PartitionError(violations)

        anchor_vals = sorted({P.x, P.y} | set(P.derived_set))
        anchors = [(v, P.explicit_at(v)) for v in anchor_vals]
        segments = []
        for (lv, lid), (rv, rid) in zip(anchors, anchors[1:]):
            middle = [(v, r) for v, r in prefix if lv < v < rv]
            segments.append(Segment(lid, rid, middle, tails.get((lid, "above")), tails.get((rid, "below"))))
        return OrderModel(P, anchors, tails, segments, prefix)

    # -- enumeration ---------------------------------------------------------

    def points(self, depth: int = DEFAULT_DEPTH) -> list[tuple[Fraction, PointRef]]:
        """All points of A in increasing order, each tail cut after ``depth`` levels."""
        P = self.partition
        out = [(self.anchors[0][0], Explicit(self.anchors[0][1]))]
        for seg in self.segments:
            if seg.above:
                t = seg.above
                for L in range(t.L0 + depth - 1, t.L0 - 1, -1):
                    for s in reversed(range(t.period)):
                        m = t.member(L, s)
                        out.append((P.value(m), m))
            out.extend(seg.middle)
            if seg.below:
                t = seg.below
                for L in range(t.L0, t.L0 + depth):
                    for s in range(t.period):
                        m = t.member(L, s)
                        out.append((P.value(m), m))
            rid = seg.right
            out.append((P.explicit[rid], Explicit(rid)))
        return out

    def gap_structure(self) -> GapStructure:
        P = self.partition
        prefix_gaps: list[Gap] = []
        templates: list[GapTemplate] = []
        for seg in self.segments:
            chain: list = []
            if not seg.above:
                chain.append(Explicit(seg.left))
            else:
                t = seg.above
                chain.append(t.member(t.L0, 0))
                templates.extend(GapTemplate(t, s) for s in range(t.period))
            chain.extend(r for _, r in seg.middle)
            if not seg.below:
                chain.append(Explicit(seg.right))
            else:
                t = seg.below
                chain.append(t.member(t.L0, 0))
                templates.extend(GapTemplate(t, s) for s in range(t.period))
            prefix_gaps.extend(Gap(a, b) for a, b in zip(chain, chain[1:]))
        return GapStructure(prefix_gaps, templates)

    def gap_list(self, depth: int = DEFAULT_DEPTH) -> list[Gap]:
        pts = self.points(depth)
        P = self.partition
        out = []
        for (v1, r1), (v2, r2) in zip(pts, pts[1:]):
            # consecutive in the truncated list but not in A when a tail was cut
            if P.next_point(v1) == r2:
                out.append(Gap(r1, r2))
        return out

    def tail_of(self, family: str) -> Tail:
        for t in self.tails.values():
            if family in t.shift:
                return t
        raise KeyError(family)

    def segment_index(self, ref: PointRef) -> tuple[int, int] | None:
        """(segment, position) of a non-anchor point."""
        for i, seg in enumerate(self.segments):
            pos = seg.pos_of(ref)
            if pos is not None:
                return i, pos
        return None

    def anchor_index(self, ref: PointRef) -> int | None:
        if isinstance(ref, Explicit):
            for i, (_, aid) in enumerate(self.anchors):
                if aid == ref.id:
                    return i
        return None

    def describe(self) -> dict:
        P = self.partition
        tails = []
        for (aid, side), t in sorted(self.tails.items(), key=lambda kv: (kv[1].alpha, kv[0][1])):
            tails.append(
                {
                    "at": fmt_rational(t.alpha),
                    "side": side,
                    "from_level": t.L0,
                    "cycle": [str(Rel(f, 0)) + (f" level=n{t.shift[f]:+d}" if t.shift[f] else " level=n") for f in t.slots],
                }
            )
        return {"prefix": [P.label(r) for _, r in self.prefix], "tails": tails}


def _separation(P: MarkovPartition, alpha: Fraction, side: str, own: set) -> Fraction:
    """A positive lower bound on the distance from alpha to points of A, on ``side``,
    that do not belong to the families in ``own``."""
    sgn = -1 if side == "below" else 1
    best: Fraction | None = None

    def offer(d: Fraction):
        nonlocal best
        if d > 0 and (best is None or d < best):
            best = d

    for v in P.explicit.values():
        if (v - alpha) * sgn > 0:
            offer(abs(v - alpha))
    for fid, fam in P.families.items():
        if fid in own or fam.alpha == alpha:
            continue
        half = abs(fam.alpha - alpha) / 2
        offer(half)
        n = fam.n0
        while abs(fam.beta) * fam.rho**n >= half:
            v = fam.value(n)
            if (v - alpha) * sgn > 0:
                offer(abs(v - alpha))
            n += 1
    if best is None:
        best = P.y - P.x
    return best


def check_partition(raw: dict) -> list[Violation]:
    """Structured list of violations for a raw partition description (empty when valid)."""
    try:
        validate_partition(raw)
    except PartitionError as exc:
        return exc.violations
    return []


def validate_partition(raw: dict) -> MarkovPartition:
    """Build a :class:`MarkovPartition` from ``{"ambient", "explicit", "families"}``.

    Raises :class:`PartitionError` listing every violation found.
    """
    violations: list[Violation] = []
    try:
        x, y = (Q(v) for v in raw["ambient"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PartitionError([Violation("schema", "ambient", f"bad ambient interval: {exc}")])
    if not x < y:
        raise PartitionError([Violation("schema", "ambient", "ambient interval needs x < y")])

    explicit_raw = raw.get("explicit", {})
    if isinstance(explicit_raw, list):
        explicit_raw = {fmt_rational(Q(v)): v for v in explicit_raw}
    explicit = {}
    for eid, v in explicit_raw.items():
        v = Q(v)
        if not x <= v <= y:
            violations.append(Violation("out-of-range", f"explicit:{eid}", f"{fmt_rational(v)} outside the ambient interval"))
        if v in explicit.values():
            violations.append(Violation("clashing-points", f"explicit:{eid}", f"duplicate explicit point {fmt_rational(v)}"))
        explicit[str(eid)] = v
    values = set(explicit.values())
    for end, name in ((x, "left"), (y, "right")):
        if end not in values:
            violations.append(
                Violation("missing-endpoint", fmt_rational(end), f"{name} ambient endpoint must be an explicit point")
            )

    families = {}
    for fid, entry in raw.get("families", {}).items():
        try:
            if isinstance(entry, GeometricFamily):
                fam = entry
            elif isinstance(entry, dict):
                fam = GeometricFamily(Q(entry["alpha"]), Q(entry["beta"]), Q(entry["rho"]), int(entry.get("n0", 1)))
            else:
                fam = GeometricFamily(*[Q(s) for s in entry[:3]], int(entry[3]) if len(entry) > 3 else 1)
        except (KeyError, TypeError, ValueError) as exc:
            violations.append(Violation("schema", f"family:{fid}", str(exc)))
            continue
        families[str(fid)] = fam
        if fam.alpha not in values:
            violations.append(
                Violation("limit-not-explicit", f"family:{fid}", f"limit {fmt_rational(fam.alpha)} is not an explicit point")
            )
        first = fam.value(fam.n0)
        if not x <= first <= y:
            violations.append(
                Violation("out-of-range", f"family:{fid}", f"member {fam.n0} = {fmt_rational(first)} outside the ambient interval")
            )
        for eid, v in explicit.items():
            if fam.index_of(v) is not None:
                violations.append(
                    Violation("clashing-points", f"family:{fid}", f"member {fam.index_of(v)} equals explicit point {eid}")
                )
    rhos: dict[Fraction, tuple[str, Fraction]] = {}
    for fid, fam in families.items():
        if fam.alpha in rhos and rhos[fam.alpha][1] != fam.rho:
            violations.append(
                Violation(
                    "mixed-rho",
                    f"family:{fid}",
                    f"rho {fmt_rational(fam.rho)} differs from family {rhos[fam.alpha][0]} at limit {fmt_rational(fam.alpha)}",
                )
            )
        rhos.setdefault(fam.alpha, (fid, fam.rho))
    if violations:
        raise PartitionError(violations)

    P = MarkovPartition((x, y), explicit, families)
    _ = P.order  # order-model construction reports clashes
    return P


def merged_order(P: MarkovPartition) -> OrderModel:
    return P.order


def gaps(P: MarkovPartition) -> GapStructure:
    return P.gaps()


def locate(P: MarkovPartition, t):
    return P.locate(t)


def is_point_of(P: MarkovPartition, v):
    return P.is_point_of(v)


def iter_points(P: MarkovPartition, depth: int = DEFAULT_DEPTH) -> Iterator[tuple[Fraction, PointRef]]:
    yield from P.order.points(depth)

"""Same-pattern maps between partition-generated functions.

A :class:`PatternMap` is an increasing bijection tau: A -> B given finitely:
an explicit table for finitely many points and, for every source family, a
target family with an index shift.  Between two consecutive accumulation
points (or ambient endpoints) of A the points form a finite, omega, omega*
or Z-shaped chain, and tau is a position shift on each chain; only Z-shaped
chains leave the shift free, which is what :func:`find_pattern_map` searches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .functions import ConstRef, GeneratedFn, LevelRef
from .limits import DOWN, UP, lim
from .partition import DEFAULT_DEPTH, Explicit, MarkovPartition, Member, PointRef, Tail, parse_ref
from .scalar import fmt_rational
from .sets import ClosedSet1D

DEFAULT_SHIFT_BOUND = 8


class UnmappedPoint(KeyError):
    pass


class PatternMapError(ValueError):
    pass


@dataclass
class TailMatch:
    """How tau acts on one source tail: member (L, s) goes to target (L + dL[s], slot[s])."""

    source: Tail
    target: Tail
    slot: list
    dL: list
    window: int  # from this source level on the family rule applies


@dataclass
class PatternMap:
    source: MarkovPartition
    target: MarkovPartition
    explicit_map: dict  # source PointRef -> target PointRef
    family_map: dict  # source family -> (target family, shift)
    name: str = ""

    # -- application ----------------------------------------------------------

    def apply(self, p: PointRef) -> PointRef:
        if p in self.explicit_map:
            return self.explicit_map[p]
        if isinstance(p, Member) and p.family in self.family_map:
            g, c = self.family_map[p.family]
            img = Member(g, p.index + c)
            if img.index >= self.target.families[g].n0:
                return img
        raise UnmappedPoint(f"tau does not map {p}")

    def apply_value(self, v: Fraction) -> Fraction:
        ref = self.source.is_point_of(v)
        if ref is None:
            raise UnmappedPoint(f"{fmt_rational(v)} is not a point of the source partition")
        return self.target.value(self.apply(ref))

    def inverse(self) -> "PatternMap":
        inv_explicit = {v: k for k, v in self.explicit_map.items()}
        if len(inv_explicit) != len(self.explicit_map):
            raise PatternMapError("explicit table is not injective")
        inv_family = {}
        for f, (g, c) in self.family_map.items():
            if g in inv_family:
                raise PatternMapError(f"two source families map to {g}")
            inv_family[g] = (f, -c)
        return PatternMap(self.target, self.source, inv_explicit, inv_family, f"inverse of {self.name}".strip())

    # -- tail structure ----------------------------------------------------------

    def tail_matches(self) -> list[TailMatch]:
        S, T = self.source.order, self.target.order
        out = []
        for tail in S.tails.values():
            fam0 = tail.slots[0]
            if fam0 not in self.family_map:
                raise PatternMapError(f"family {fam0} has no target family")
            ttail = T.tail_of(self.family_map[fam0][0])
            slot, dL = [], []
            for f in tail.slots:
                g, c = self.family_map[f]
                if g not in ttail.shift:
                    raise PatternMapError(f"families of one tail map to different target tails ({f} -> {g})")
                slot.append(ttail.slots.index(g))
                dL.append(c + ttail.shift[g] - tail.shift[f])
            window = tail.L0
            for key in self.explicit_map:
                if isinstance(key, Member) and key.family in tail.shift:
                    window = max(window, key.index + tail.shift[key.family] + 1)
            window = max([window] + [ttail.L0 - d for d in dL])
            out.append(TailMatch(tail, ttail, slot, dL, window))
        return out

    def sym(self, r) -> object:
        """Image of a source tail reference, still in terms of the source level."""
        if isinstance(r, LevelRef):
            g, c = self.family_map[r.family]
            return LevelRef(g, r.d + c)
        ref = self.source.canonical(r.ref)
        if ref is None:
            raise UnmappedPoint(f"{r.ref} is not a point of the source partition")
        return ConstRef(self.apply(ref))

    # -- serialization --------------------------------------------------------------

    def to_json(self) -> dict:
        S = self.source
        items = sorted(self.explicit_map.items(), key=lambda kv: S.value(kv[0]))
        return {
            "format": "cmif-pattern/1",
            "name": self.name,
            "explicit": [[str(k), str(v)] for k, v in items],
            "families": {f: {"target": g, "shift": c} for f, (g, c) in sorted(self.family_map.items())},
        }

    @staticmethod
    def from_json(doc: dict, source: MarkovPartition, target: MarkovPartition) -> "PatternMap":
        if doc.get("format") != "cmif-pattern/1":
            raise PatternMapError("not a pattern-map document (format cmif-pattern/1)")
        explicit = {parse_ref(a): parse_ref(b) for a, b in doc.get("explicit", [])}
        fams = {f: (entry["target"], int(entry["shift"])) for f, entry in doc.get("families", {}).items()}
        return PatternMap(source, target, explicit, fams, doc.get("name", ""))


def tau_apply(tau: PatternMap, p: PointRef) -> PointRef:
    return tau.apply(p)


# -- validity ------------------------------------------------------------------------


def validate_pattern_map(tau: PatternMap, depth: int = DEFAULT_DEPTH) -> list[str]:
    """Problems that keep tau from being an increasing bijection A -> B (empty if none)."""
    S, T = tau.source, tau.target
    problems = []
    for f in S.families:
        if f not in tau.family_map:
            problems.append(f"family {f} has no target family")
    for f, (g, _) in tau.family_map.items():
        if f not in S.families or g not in T.families:
            problems.append(f"family map {f} -> {g} names an unknown family")
    if problems:
        return problems
    try:
        matches = tau.tail_matches()
    except PatternMapError as exc:
        return [str(exc)]
    for m in matches:
        k = m.source.period
        if m.target.period != k:
            problems.append(f"tail at {fmt_rational(m.source.alpha)} has period {k}, image tail {m.target.period}")
            continue
        if m.source.side != m.target.side:
            problems.append(f"tail at {fmt_rational(m.source.alpha)} maps to a tail on the other side")
        offsets = {m.dL[s] * k + m.slot[s] - s for s in range(k)}
        if len(offsets) != 1 or sorted(m.slot) != list(range(k)):
            problems.append(f"tail at {fmt_rational(m.source.alpha)}: family map is not a shift of the interleaving")
        try:
            anchor_img = tau.apply(Explicit(m.source.anchor))
        except UnmappedPoint:
            problems.append(f"accumulation point {m.source.anchor} is not mapped")
            continue
        if anchor_img != Explicit(m.target.anchor):
            problems.append(f"accumulation point {m.source.anchor} does not map to the image tail's limit")
    if problems:
        return problems
    for end, timg in ((S.x, T.x), (S.y, T.y)):
        try:
            if tau.apply_value(end) != timg:
                problems.append(f"ambient endpoint {fmt_rational(end)} does not map to {fmt_rational(timg)}")
        except UnmappedPoint as exc:
            problems.append(str(exc))
    if problems:
        return problems
    extra = max([m.window - m.source.L0 for m in matches] + [0])
    try:
        inv = tau.inverse()
    except PatternMapError as exc:
        return [str(exc)]
    prev = None
    for v, ref in S.order.points(depth + extra):
        try:
            img = tau.apply(ref)
            w = T.value(img)
            back = inv.apply(img)
        except (UnmappedPoint, KeyError, ValueError) as exc:
            problems.append(f"{ref}: {exc}")
            break
        if back != ref:
            problems.append(f"tau is not injective at {ref}")
            break
        if prev is not None and w <= prev:
            problems.append(f"tau is not increasing at {ref}")
            break
        prev = w
    inv_extra = max([m.window + max(m.dL) - m.target.L0 for m in matches] + [0])
    for v, ref in T.order.points(depth + inv_extra):
        try:
            if tau.apply(inv.apply(ref)) != ref:
                problems.append(f"tau is not onto at {ref}")
                break
        except (UnmappedPoint, KeyError, ValueError) as exc:
            problems.append(f"{ref} has no preimage: {exc}")
            break
    return problems


# -- same pattern -----------------------------------------------------------------------


@dataclass
class PatternResult:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def _map_set(tau: PatternMap, s: ClosedSet1D) -> ClosedSet1D | None:
    pieces = []
    for lo, hi in s.components:
        try:
            pieces.append((tau.apply_value(lo), tau.apply_value(hi)))
        except UnmappedPoint:
            return None
    return ClosedSet1D.of(pieces)


def _check_point(f: GeneratedFn, g: GeneratedFn, tau: PatternMap, v: Fraction, ref: PointRef) -> list:
    out = []
    w = tau.target.value(tau.apply(ref))
    u1, v1 = f.value_at_point(ref)
    want = _map_set(tau, ClosedSet1D.of([(u1, v1)]))
    got = ClosedSet1D.of([g.value_at_point(tau.apply(ref))])
    if want != got:
        out.append({"a": str(ref), "condition": "value", "f": f"[{fmt_rational(u1)}, {fmt_rational(v1)}]", "g": got.to_text()})
    for side in (UP, DOWN):
        lf, lg = lim(f, v, side), lim(g, w, side)
        mapped = _map_set(tau, lf)
        if mapped != lg:
            out.append({"a": str(ref), "condition": f"lim_{side}", "f": lf.to_text(), "g": lg.to_text()})
    return out


def check_same_pattern(f: GeneratedFn, g: GeneratedFn, tau: PatternMap, depth: int = DEFAULT_DEPTH) -> PatternResult:
    """Values and both one-sided limits correspond under tau at every point of A.

    Tail families are compared symbolically; the first levels are compared
    point by point.
    """
    problems = validate_pattern_map(tau, min(depth, 16))
    if problems:
        return PatternResult(False, [{"condition": "tau", "detail": p} for p in problems])
    S = f.partition
    matches = tau.tail_matches()
    by_family = {fam: m for m in matches for fam in m.source.slots}
    violations = []
    extra = 0
    for m in matches:
        start = max(m.window, f.symbolic_start(m.source), max(g.symbolic_start(m.target) - d for d in m.dL))
        for s in range(m.source.period):
            refs_f = list(f.tail_value_refs(m.source, s))
            lf = f.tail_limit_refs(m.source, s)
            refs_f += [lf[UP], lf[DOWN]]
            for r in refs_f:
                if isinstance(r, LevelRef):
                    other = by_family[r.family]
                    start = max(start, other.window - r.d - other.source.shift[r.family])
        extra = max(extra, start - m.source.L0)
        for s in range(m.source.period):
            t_s, d = m.slot[s], m.dL[s]
            lf, lgm = f.tail_limit_refs(m.source, s), g.tail_limit_refs(m.target, t_s)
            pairs = list(zip(("u", "v"), f.tail_value_refs(m.source, s), g.tail_value_refs(m.target, t_s)))
            pairs += [(f"lim_{UP}", lf[UP], lgm[UP]), (f"lim_{DOWN}", lf[DOWN], lgm[DOWN])]
            for what, rf, rg in pairs:
                try:
                    image = tau.sym(rf)
                except UnmappedPoint as exc:
                    violations.append({"a": str(m.source.member(start, s)), "condition": what, "detail": str(exc)})
                    continue
                if isinstance(rg, LevelRef):
                    rg = LevelRef(rg.family, rg.d + d)
                diff = g.sym_expr(image) - g.sym_expr(rg)
                if not diff.is_zero_from(start):
                    violations.append(
                        {"a": f"{m.source.member(start, s)} and beyond", "condition": what, "detail": "tail rules disagree under tau"}
                    )
    for v, ref in S.order.points(depth + extra):
        try:
            violations.extend(_check_point(f, g, tau, v, ref))
        except UnmappedPoint as exc:
            violations.append({"a": str(ref), "condition": "tau", "detail": str(exc)})
        if len(violations) > 20:
            break
    return PatternResult(not violations, violations)


# -- search ------------------------------------------------------------------------------


def _shift_order(bound: int) -> list[int]:
    return sorted(range(-bound, bound + 1), key=lambda d: (abs(d), d))


def _tail_pos(seg, tail: Tail, L: int, s: int) -> int:
    k = tail.period
    if tail is seg.below:
        return len(seg.middle) + (L - tail.L0) * k + s
    return -(1 + (L - tail.L0) * k + s)


def _build_from_shifts(f: GeneratedFn, g: GeneratedFn, shifts: list[int]) -> PatternMap | None:
    S, T = f.partition.order, g.partition.order
    explicit: dict = {}
    family: dict = {}
    for (_, a), (_, b) in zip(S.anchors, T.anchors):
        explicit[Explicit(a)] = Explicit(b)
    for sa, sb, D in zip(S.segments, T.segments, shifts):
        tails = [(sa.below, sb.below), (sa.above, sb.above)]
        deep = {}
        for ta, tb in tails:
            if ta is None:
                continue
            k = ta.period
            Lstar = ta.L0 + (abs(D) + len(sa.middle) + len(sb.middle) + tb.L0 * k) // k + 2
            deep[id(ta)] = Lstar
            for s, fam in enumerate(ta.slots):
                q = _tail_pos(sa, ta, Lstar, s) + D
                img = sb.ref_at(q)
                family[fam] = (img.family, img.index - ta.member(Lstar, s).index)
        # every point before the deep levels is tabulated unless the family rule already gives it
        positions = list(range(len(sa.middle)))
        for ta in (sa.below, sa.above):
            if ta is not None:
                for L in range(ta.L0, deep[id(ta)] + 1):
                    positions.extend(_tail_pos(sa, ta, L, s) for s in range(ta.period))
        for p in positions:
            src = sa.ref_at(p)
            try:
                img = sb.ref_at(p + D)
            except IndexError:
                return None
            rule = None
            if isinstance(src, Member) and src.family in family:
                g_fam, c = family[src.family]
                rule = Member(g_fam, src.index + c)
            if rule != img:
                explicit[src] = img
    return PatternMap(f.partition, g.partition, explicit, family)


def candidate_maps(f: GeneratedFn, g: GeneratedFn, shift_bound: int = DEFAULT_SHIFT_BOUND):
    """Order-isomorphisms A -> B in the structured class, in deterministic order."""
    S, T = f.partition.order, g.partition.order
    if len(S.anchors) != len(T.anchors):
        return
    choices = []
    for sa, sb in zip(S.segments, T.segments):
        if sa.kind != sb.kind:
            return
        for ta, tb in ((sa.below, sb.below), (sa.above, sb.above)):
            if ta is not None and ta.period != tb.period:
                return
        if sa.kind == "finite":
            if len(sa.middle) != len(sb.middle):
                return
            choices.append([0])
        elif sa.kind == "omega":
            choices.append([0])
        elif sa.kind == "omega*":
            choices.append([len(sb.middle) - len(sa.middle)])
        else:
            choices.append(_shift_order(shift_bound))
    for shifts in itertools.product(*choices):
        tau = _build_from_shifts(f, g, list(shifts))
        if tau is not None:
            tau.name = "shifts " + ",".join(str(d) for d in shifts)
            yield tau


def find_pattern_map(
    f: GeneratedFn, g: GeneratedFn, shift_bound: int = DEFAULT_SHIFT_BOUND, depth: int = DEFAULT_DEPTH
) -> PatternMap | None:
    for tau in candidate_maps(f, g, shift_bound):
        if check_same_pattern(f, g, tau, depth):
            return tau
    return None


def identity_map(P: MarkovPartition) -> PatternMap:
    return PatternMap(P, P, {Explicit(e): Explicit(e) for e in P.explicit}, {f: (f, 0) for f in P.families}, "identity")

"""Decide whether a generated function is countably Markov with respect to its partition.

Conditions checked:

1. values at partition points are intervals [u, v] with u <= v and u, v in A;
2. every gap piece is injective (distinct image endpoints);
3. at points of A outside A', both one-sided limits lie in A;
4. at points of A', min and max of both one-sided limits lie in A;

plus upper semicontinuity (closed graph).  Family rules are checked
symbolically for every level from the first rule-governed one, and
concretely for the first ``depth`` levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .functions import CheckResult, GeneratedFn, LevelRef, closed_graph_check
from .limits import DOWN, UP, first_failing_level, lim, tail_limit
from .partition import DEFAULT_DEPTH, Literal
from .scalar import fmt_rational


@dataclass
class MarkovReport:
    overall: bool
    conditions: dict  # 1..4 -> CheckResult
    usc: CheckResult
    derived_set: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.overall

    def to_json(self) -> dict:
        return {
            "overall": "pass" if self.overall else "fail",
            "derived_set": [fmt_rational(v) for v in self.derived_set],
            "conditions": {str(k): v.to_json() for k, v in sorted(self.conditions.items())},
            "usc": self.usc.to_json(),
        }


def _literal_outside(f: GeneratedFn, r) -> bool:
    ref = getattr(r, "ref", r)
    return isinstance(ref, Literal) and f.partition.is_point_of(ref.value) is None


def _check_values(f: GeneratedFn, depth: int) -> list:
    P = f.partition
    out = []
    for val, ref in P.order.points(depth):
        u, v = f.value_refs(ref)
        for r in (u, v):
            if isinstance(r, Literal) and P.is_point_of(r.value) is None:
                out.append({"point": str(ref), "reason": f"value endpoint {fmt_rational(r.value)} is not in A"})
        if P.value(u) > P.value(v):
            out.append({"point": str(ref), "reason": "value endpoints are in the wrong order (u > v)"})
    for tail in P.order.tails.values():
        start = f.symbolic_start(tail)
        for s in range(tail.period):
            u, v = f.tail_value_refs(tail, s)
            L = first_failing_level(f.sym_expr(v) - f.sym_expr(u), start, lambda sg: sg < 0)
            if L is not None:
                out.append({"point": str(tail.member(L, s)), "reason": "family value rule gives u > v"})
    return out


def _check_gaps(f: GeneratedFn, depth: int) -> list:
    P = f.partition
    out = []
    for gap in P.order.gap_list(depth):
        st, en = f.gap_images(gap)
        if st == en:
            out.append({"gap": str(gap), "reason": f"constant image {fmt_rational(st)} (not injective)"})
    for tail in P.order.tails.values():
        start = f.symbolic_start(tail)
        for s in range(tail.period):
            st, en = f.tail_gap_refs(tail, s)
            L = first_failing_level(f.sym_expr(en) - f.sym_expr(st), start, lambda sg: sg == 0)
            if L is not None:
                gap = f"limit-side gap of {tail.member(L, s)}"
                out.append({"gap": gap, "reason": "family gap rule is constant at this level (not injective)"})
    return out


def _limit_witness(a: Fraction, side: str, value, why: str) -> dict:
    return {"a": fmt_rational(a), "side": side, "limit": value.to_text(), "reason": why}


def _check_limits(f: GeneratedFn, depth: int) -> tuple[list, list]:
    """Witnesses for conditions 3 and 4."""
    P = f.partition
    c3, c4 = [], []
    derived = set(P.derived_set)
    for val, ref in P.order.points(depth):
        for side in (UP, DOWN):
            lv = lim(f, val, side)
            if lv.is_empty:
                continue
            if val in derived:
                for end in (lv.min(), lv.max()):
                    if P.is_point_of(end) is None:
                        c4.append(_limit_witness(val, side, lv, f"{fmt_rational(end)} is not in A"))
                        break
            elif not lv.is_singleton or P.is_point_of(lv.min()) is None:
                c3.append(_limit_witness(val, side, lv, "one-sided limit is not a point of A"))
    # the tail rules only ever produce A-points, except through literal values
    for tail in P.order.tails.values():
        start = f.symbolic_start(tail)
        for s in range(tail.period):
            for side, r in f.tail_limit_refs(tail, s).items():
                if _literal_outside(f, r):
                    m = tail.member(start, s)
                    c3.append(
                        {"a": str(m), "side": side, "limit": fmt_rational(r.ref.value), "reason": "tail rule limit is not in A"}
                    )
    return c3, c4


def verify_cmif(f: GeneratedFn, depth: int = DEFAULT_DEPTH) -> MarkovReport:
    conditions = {
        1: CheckResult(not (w := _check_values(f, depth)), w),
        2: CheckResult(not (w := _check_gaps(f, depth)), w),
    }
    c3, c4 = _check_limits(f, depth)
    conditions[3] = CheckResult(not c3, c3)
    conditions[4] = CheckResult(not c4, c4)
    usc = closed_graph_check(f, depth)
    overall = usc.ok and all(c.ok for c in conditions.values())
    return MarkovReport(overall, conditions, usc, list(f.partition.derived_set))


def is_point_of(P, v):
    return P.is_point_of(v)

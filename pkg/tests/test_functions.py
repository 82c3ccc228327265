from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmif.functions import (
    Box,
    FiniteGraph,
    FunctionError,
    GeneratedFn,
    GraphSegment,
    OutOfDomain,
    SegmentFamily,
    closed_graph_check,
    evaluate,
    surjective_graph_check,
)
from cmif.partition import Explicit, validate_partition
from cmif.scalar import Const, Mobius
from cmif.sets import ClosedSet1D

from conftest import GENERATED


def test_evaluate_examples(fx):
    xxx = fx("xxx")
    assert evaluate(xxx, F(1, 2)) == ClosedSet1D.interval(0, 1)
    assert evaluate(xxx, F(3, 4)) == ClosedSet1D.point(F(9, 10))
    assert evaluate(fx("identity"), F(1, 3)) == ClosedSet1D.point(F(1, 3))


def test_evaluate_out_of_domain(fx):
    for name in ("xxx", "bennet"):
        with pytest.raises(OutOfDomain):
            evaluate(fx(name), F(3, 2))


def test_xxx_oscillation_members(fx):
    # member n runs from (1/2 - 1/(2n), 1/3) to (1/2 - 1/(2n+1), 2/3)
    xxx = fx("xxx")
    for n in (1, 2, 7):
        a, b = F(1, 2) - F(1, 2 * n), F(1, 2) - F(1, 2 * n + 1)
        assert evaluate(xxx, a) == ClosedSet1D.point(F(1, 3))
        assert evaluate(xxx, b) == ClosedSet1D.point(F(2, 3))
        assert evaluate(xxx, (a + b) / 2) == ClosedSet1D.point(F(1, 2))


def test_closed_graph_examples(fx):
    res = closed_graph_check(fx("xxxx"))
    assert not res.ok
    w = res.witnesses[0]
    assert (w["x"], w["y"]) == ("1/2", "0/1")
    assert closed_graph_check(fx("xxx")).ok
    assert closed_graph_check(fx("bennet")).ok


def test_surjective_examples(fx):
    assert surjective_graph_check(fx("xxx")).ok
    assert surjective_graph_check(fx("identity")).ok
    const = FiniteGraph((0, 1), [GraphSegment(0, F(1, 2), 1, F(1, 2))])
    res = surjective_graph_check(const)
    assert not res.ok
    assert [w["uncovered"] for w in res.witnesses] == ["[0/1, 1/2)", "(1/2, 1/1]"]


def test_open_segment_end_detected():
    g = FiniteGraph((0, 1), [GraphSegment(0, 0, F(1, 2), F(1, 2), open1=True), GraphSegment(F(1, 2), 1, 1, 1)])
    res = closed_graph_check(g)
    assert not res.ok and res.witnesses[0]["x"] == "1/2"
    g.segments.append(GraphSegment(F(1, 2), 0, F(1, 2), 1))
    assert closed_graph_check(g).ok


def test_family_accumulation_segment_required():
    fam = SegmentFamily(Mobius(1, -1, 2, 0), Const(F(1, 3)), Mobius(2, -1, 4, 2), Const(F(2, 3)))
    g = FiniteGraph((0, 1), [GraphSegment(F(1, 2), 0, 1, 1)], families=[fam])
    res = closed_graph_check(g)
    assert not res.ok and res.witnesses[0]["x"] == "1/2"


def test_segment_family_rejects_bad_data():
    with pytest.raises(ValueError):
        SegmentFamily(Mobius(1, -1, 2, 0), Const(0), Mobius(1, 0, 1, 0), Const(1))
    with pytest.raises(ValueError):
        SegmentFamily(Const(F(1, 2)), Const(0), Const(F(1, 2)), Const(1))


def test_box_validation():
    with pytest.raises(ValueError):
        Box(1, 0, 0, 1)
    with pytest.raises(ValueError):
        GraphSegment(0, 0, 0, 1, open0=True)


def test_generated_structure_errors():
    P = validate_partition({"ambient": [0, 1], "explicit": {"0": 0, "1": 1}})
    with pytest.raises(FunctionError, match="missing"):
        GeneratedFn(P, {Explicit("0"): (Explicit("0"), Explicit("0"))}, {})


@given(st.integers(1, 400), st.fractions(min_value=0, max_value=1, max_denominator=1000))
def test_members_touching_matches_brute_force(n, u):
    fam = SegmentFamily(Mobius(1, -1, 2, 0), Const(F(1, 3)), Mobius(2, -1, 4, 2), Const(F(2, 3)))
    m = fam.member(n)
    t = m.x0 + u * (m.x1 - m.x0)
    brute = [fam.member(k) for k in range(1, 500) if fam.member(k).x0 <= t <= fam.member(k).x1]
    assert fam.members_touching(t) == brute


@pytest.mark.parametrize("name", GENERATED)
def test_generated_fibers_shape(fx, name):
    f = fx(name)
    P = f.partition
    for val, ref in P.order.points(6):
        fib = f.evaluate(val)
        assert fib.is_interval and not fib.is_empty
    for gap in P.order.gap_list(6):
        t = (P.value(gap.left) + P.value(gap.right)) / 2
        assert f.evaluate(t).is_singleton


@pytest.mark.parametrize("name", GENERATED)
@pytest.mark.parametrize("N", [1, 3, 8])
def test_truncation_consistency(fx, name, N):
    f = fx(name)
    g = f.truncate(N)
    P = f.partition
    for gap in P.order.gap_list(N):
        a, b = P.value(gap.left), P.value(gap.right)
        for t in (a + (b - a) / 3, (a + b) / 2):
            assert f.evaluate(t) == g.evaluate(t)
    if closed_graph_check(f).ok:
        assert closed_graph_check(g).ok
        for val, _ in P.order.points(N):
            assert g.evaluate(val).issubset(f.evaluate(val))

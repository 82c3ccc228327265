import time
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmif.partition import Explicit, Member
from cmif.pattern import (
    PatternMap,
    _build_from_shifts,
    check_same_pattern,
    find_pattern_map,
    identity_map,
    tau_apply,
    validate_pattern_map,
)

TAU2 = {
    "format": "cmif-pattern/1",
    "name": "tau2",
    "explicit": [["explicit:0", "explicit:0"], ["family:d[1]", "family:u[1]"], ["explicit:1", "explicit:1"]],
    "families": {"d": {"target": "d", "shift": -1}, "u": {"target": "u", "shift": 1}},
}


@pytest.fixture(scope="module")
def tau_f(fx):
    return fx("tau_example")


@pytest.fixture(scope="module")
def tau2(tau_f):
    P = tau_f.partition
    return PatternMap.from_json(TAU2, P, P)


def test_tau_apply_examples(tau_f, tau2):
    P = tau_f.partition
    assert P.value(tau_apply(tau2, P.is_point_of(F(1, 2)))) == F(3, 4)
    assert P.value(tau_apply(tau2, P.is_point_of(F(1, 4)))) == F(1, 2)
    tau1 = identity_map(P)
    for v, ref in P.order.points(6):
        assert tau_apply(tau1, ref) == ref


def test_both_maps_are_patterns(tau_f, tau2):
    assert validate_pattern_map(tau2) == []
    assert check_same_pattern(tau_f, tau_f, identity_map(tau_f.partition)).ok
    assert check_same_pattern(tau_f, tau_f, tau2).ok
    assert check_same_pattern(tau_f, tau_f, tau2.inverse()).ok


def test_find_returns_identity_first(tau_f):
    tau = find_pattern_map(tau_f, tau_f)
    assert tau is not None
    for v, ref in tau_f.partition.order.points(8):
        assert tau.apply(ref) == ref


@given(st.integers(-6, 6))
def test_every_shift_of_the_symmetric_example_is_a_pattern(tau_f, D):
    tau = _build_from_shifts(tau_f, tau_f, [D])
    assert tau is not None
    assert validate_pattern_map(tau) == []
    assert check_same_pattern(tau_f, tau_f, tau).ok
    # pattern maps are increasing bijections: the shift moves every point by D positions
    pts = [r for _, r in tau_f.partition.order.points(30)]
    i = pts.index(Member("d", 5))
    assert pts.index(tau.apply(Member("d", 5))) - i == D


def test_bennet_vs_scaled(fx):
    f, g = fx("bennet"), fx("bennet_scaled")
    tau = find_pattern_map(f, g)
    assert tau is not None
    assert tau.apply(Explicit("1")) == Explicit("2")
    for v, ref in f.partition.order.points(10):
        assert g.partition.value(tau.apply(ref)) == 2 * v
    assert check_same_pattern(g, f, tau.inverse()).ok


def test_tent_pairs(fx):
    tau = find_pattern_map(fx("tent"), fx("tent_b"))
    assert tau is not None and tau.apply(Explicit("1")) == Explicit("1")
    assert find_pattern_map(fx("tent"), fx("tent_flat")) is None
    (only,) = [identity_map(fx("tent").partition)]
    res = check_same_pattern(fx("tent"), fx("tent_flat"), only)
    assert not res.ok and res.violations[0]["a"] == "explicit:1"


def test_invalid_maps_are_reported(tau_f):
    P = tau_f.partition
    broken = PatternMap(P, P, {Explicit("0"): Explicit("0"), Explicit("1"): Explicit("1")}, {"d": ("d", -1), "u": ("u", 0)})
    assert validate_pattern_map(broken)
    assert not check_same_pattern(tau_f, tau_f, broken).ok
    swapped = PatternMap(P, P, {Explicit("0"): Explicit("1"), Explicit("1"): Explicit("0")}, {"d": ("u", 0), "u": ("d", 0)})
    assert validate_pattern_map(swapped)


def test_json_round_trip(tau_f, tau2):
    P = tau_f.partition
    again = PatternMap.from_json(tau2.to_json(), P, P)
    assert again.explicit_map == tau2.explicit_map and again.family_map == tau2.family_map


def test_structural_mismatch_gives_none(fx):
    assert find_pattern_map(fx("tent"), fx("bennet")) is None
    assert find_pattern_map(fx("identity"), fx("tent")) is None


def test_search_runtime(tau_f):
    t = time.perf_counter()
    find_pattern_map(tau_f, tau_f, shift_bound=8)
    assert time.perf_counter() - t < 5

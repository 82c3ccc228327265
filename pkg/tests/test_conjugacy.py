import time
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmif.conjugacy import (
    HomeoChain,
    LengthMismatch,
    PatternMismatch,
    apply_H,
    build_chain,
    build_h1,
    lift_h,
    verify_commuting,
)
from cmif.partition import Gap
from cmif.pattern import PatternMap, find_pattern_map, identity_map

from test_pattern import TAU2


@pytest.fixture(scope="module")
def tent_pair(fx):
    f, g = fx("tent"), fx("tent_b")
    return f, g, find_pattern_map(f, g)


@pytest.fixture(scope="module")
def bennet_pair(fx):
    f, g = fx("bennet"), fx("bennet_scaled")
    return f, g, find_pattern_map(f, g)


@pytest.fixture(scope="module")
def bennet_chain(bennet_pair):
    f, g, tau = bennet_pair
    return build_chain(f, g, tau, 10)


@pytest.fixture(scope="module")
def tent_chain(tent_pair):
    f, g, tau = tent_pair
    return build_chain(f, g, tau, 5)


def _gap_samples(P, depth=6):
    for gap in P.order.gap_list(depth):
        a, b = P.value(gap.left), P.value(gap.right)
        yield from (a + (b - a) * k / 7 for k in range(1, 7))


def test_h1_examples(fx, tent_pair, bennet_pair):
    _, _, tau = tent_pair
    assert build_h1(tau)(F(1, 4)) == F(1, 8)
    P = fx("tau_example").partition
    h = build_h1(identity_map(P))
    assert all(h(t) == t for t in _gap_samples(P))
    f, _, tau = bennet_pair
    h = build_h1(tau)
    assert all(h(t) == 2 * t for t in _gap_samples(f.partition))
    assert all(h(v) == 2 * v for v, _ in f.partition.order.points(8))


def test_lift_identity(fx):
    f = fx("identity")
    tau = identity_map(f.partition)
    h2 = lift_h(build_h1(tau), f, f, tau)
    assert all(h2(F(k, 13)) == F(k, 13) for k in range(14))


def test_lift_doubling(bennet_chain, fx):
    P = fx("bennet").partition
    for h in bennet_chain.maps[:4]:
        assert all(h(t) == 2 * t for t in _gap_samples(P, 5))


def test_lift_slope_product_formula(tent_pair):
    f, g, tau = tent_pair
    h1 = build_h1(tau)
    h2 = lift_h(h1, f, g, tau)
    P = f.partition
    for gap in P.order.gap_list():
        fs, _ = f.gap_affine(gap)
        for lo, hi, slope, _ in h2.pieces(gap):
            t = (lo + hi) / 2
            # slopes of h1 at f(t) and of g at h2(t), from exact difference quotients
            ft = f.evaluate(t).min()
            e = F(1, 10**9)
            h1s = (h1(ft + e) - h1(ft - e)) / (2 * e)
            gt = h2(t)
            gs = (g.evaluate(gt + e).min() - g.evaluate(gt - e).min()) / (2 * e)
            assert slope == h1s * fs / gs


def test_chain_lengths_and_squares(bennet_chain, tent_chain):
    assert len(bennet_chain.maps) == 11 and bennet_chain.ok
    assert len(tent_chain.maps) == 6 and tent_chain.ok
    assert all(s.ok for s in bennet_chain.squares)


def test_identity_chain(fx):
    f = fx("tau_example")
    tau = identity_map(f.partition)
    chain = build_chain(f, f, tau, 3)
    assert chain.ok
    for h in chain.maps:
        assert all(h(t) == t for t in _gap_samples(f.partition, 4))


def test_tau2_chain_commutes(fx):
    f = fx("tau_example")
    tau2 = PatternMap.from_json(TAU2, f.partition, f.partition)
    chain = build_chain(f, f, tau2, 1)
    assert chain.ok
    assert chain.maps[0](F(1, 2)) == F(3, 4) and chain.maps[1](F(1, 4)) == F(1, 2)


@pytest.mark.parametrize("pair", ["tent_pair", "bennet_pair"])
def test_perturbation_detected_on_every_square(request, pair):
    f, g, tau = request.getfixturevalue(pair)
    chain = build_chain(f, g, tau, 3)
    gaps = f.partition.order.gap_list(4)
    for i in range(3):
        for gap in gaps[:3]:
            bad = chain.maps[i + 1].perturbed(gap, F(1, 1000))
            res = verify_commuting(chain.maps[i], f, g, bad, index=i + 1)
            assert not res.ok and res.witness is not None


def test_mismatched_pattern_raises(fx):
    f, g = fx("tent"), fx("tent_flat")
    with pytest.raises(PatternMismatch):
        build_chain(f, g, identity_map(f.partition), 2)


def test_apply_H_examples(fx, bennet_chain, tent_chain):
    f = fx("identity")
    ident = build_chain(f, f, identity_map(f.partition), 2)
    assert apply_H(ident, (F(1, 3), F(1, 5))) == (F(1, 3), F(1, 5))
    assert apply_H(bennet_chain, (F(1, 4), F(1, 8), F(1, 2))) == (F(1, 2), F(1, 4), 1)
    assert apply_H(tent_chain, (F(1, 2), F(1, 3)))[0] == F(1, 4)
    with pytest.raises(LengthMismatch):
        apply_H(tent_chain, (0, 0), 3)
    with pytest.raises(LengthMismatch):
        apply_H(tent_chain, tuple([0] * 7))


def test_maps_are_homeomorphisms(bennet_chain, tent_chain):
    for chain in (bennet_chain, tent_chain):
        for h in chain.maps:
            assert h.check_homeomorphism(8) == []


@pytest.mark.parametrize("pair", ["tent_pair", "bennet_pair"])
@given(u=st.fractions(min_value=0, max_value=1, max_denominator=10**6), i=st.integers(0, 3))
def test_inverse_chain_inverts(request, pair, u, i):
    f, g, tau = request.getfixturevalue(pair)
    chain = _chains(pair, f, g, tau)
    inv = _chains(pair + "^-1", g, f, tau.inverse())
    lo, hi = f.domain
    t = lo + u * (hi - lo)
    assert inv.maps[i](chain.maps[i](t)) == t
    assert chain.maps[i].inverse_value(chain.maps[i](t)) == t


_CACHE: dict = {}


def _chains(key, f, g, tau) -> HomeoChain:
    if key not in _CACHE:
        _CACHE[key] = build_chain(f, g, tau, 3)
    return _CACHE[key]


def test_depth_10_runtime(bennet_pair, tent_pair):
    for f, g, tau in (bennet_pair, tent_pair):
        t = time.perf_counter()
        assert build_chain(f, g, tau, 10).ok
        assert time.perf_counter() - t < 5

from fractions import Fraction as F

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cmif.partition import (
    Explicit,
    Gap,
    Member,
    PartitionError,
    check_partition,
    gaps,
    locate,
    merged_order,
    parse_ref,
    validate_partition,
)

BENNET_RAW = {
    "ambient": [0, 1],
    "explicit": {"0": 0, "1": 1},
    "families": {"f1": [1, F(-3, 2), F(1, 2), 1], "f2": [1, -1, F(1, 2), 1]},
}


@pytest.fixture(scope="module")
def bennet():
    return validate_partition(BENNET_RAW)


def test_bennet_valid_with_derived_set(bennet):
    assert bennet.derived_set == [1]


def test_finite_partition_valid():
    P = validate_partition({"ambient": [0, 1], "explicit": [0, F(1, 2), 1]})
    assert P.derived_set == []
    assert [v for v, _ in merged_order(P).points()] == [0, F(1, 2), 1]
    assert [str(g) for g in gaps(P).prefix] == ["(explicit:0/1, explicit:1/2)", "(explicit:1/2, explicit:1/1)"]
    assert gaps(P).templates == []


def test_limit_must_be_explicit():
    v = check_partition({"ambient": [0, 1], "explicit": [0, 1], "families": {"h": [F(1, 2), F(-1, 4), F(1, 2), 1]}})
    assert [x.code for x in v] == ["limit-not-explicit"]
    assert v[0].datum == "family:h"


@pytest.mark.parametrize(
    "raw, code",
    [
        ({"ambient": [0, 1], "explicit": [0]}, "missing-endpoint"),
        ({"ambient": [0, 1], "explicit": [0, 1], "families": {"a": [1, -1, F(1, 2)], "b": [1, -1, F(1, 3)]}}, "mixed-rho"),
        ({"ambient": [0, 1], "explicit": [0, F(1, 2), 1], "families": {"a": [1, -1, F(1, 2)]}}, "clashing-points"),
        ({"ambient": [0, 1], "explicit": [0, 1], "families": {"a": [1, -4, F(1, 2)]}}, "out-of-range"),
        ({"ambient": [0, 1], "explicit": [0, 2, 1]}, "out-of-range"),
    ],
)
def test_violations_name_the_datum(raw, code):
    with pytest.raises(PartitionError) as exc:
        validate_partition(raw)
    assert code in {v.code for v in exc.value.violations}


def test_bennet_merged_order(bennet):
    first = [v for v, _ in merged_order(bennet).points(8)][:7]
    assert first == [0, F(1, 4), F(1, 2), F(5, 8), F(3, 4), F(13, 16), F(7, 8)]
    refs = [r for _, r in merged_order(bennet).points(4)][1:7]
    assert refs == [Member("f1", 1), Member("f2", 1), Member("f1", 2), Member("f2", 2), Member("f1", 3), Member("f2", 3)]


def test_one_family_from_above():
    P = validate_partition({"ambient": [0, 1], "explicit": [0, 1], "families": {"d": [0, 1, F(1, 2), 1]}})
    pts = merged_order(P).points(3)
    assert [v for v, _ in pts] == [0, F(1, 8), F(1, 4), F(1, 2), 1]
    (tail,) = merged_order(P).tails.values()
    assert tail.side == "above" and tail.alpha == 0


def test_bennet_gaps(bennet):
    g = gaps(bennet)
    assert g.prefix[0] == Gap(Explicit("0"), Member("f1", 1))
    concrete = {t.concretize(L) for t in g.templates for L in range(2, 7)}
    assert Gap(Member("f1", 3), Member("f2", 3)) in concrete
    assert Gap(Member("f2", 3), Member("f1", 4)) in concrete


def test_locate_examples(bennet):
    assert locate(bennet, F(3, 10)) == ("gap", Gap(Member("f1", 1), Member("f2", 1)))
    assert locate(bennet, F(3, 4)) == ("point", Member("f2", 2))
    assert locate(bennet, 1) == ("point", Explicit("1"))
    with pytest.raises(ValueError, match="out-of-ambient"):
        locate(bennet, F(3, 2))


def test_two_point_partition_gap():
    P = validate_partition({"ambient": [0, 1], "explicit": [0, 1]})
    assert gaps(P).prefix == [Gap(Explicit("0/1"), Explicit("1/1"))]


def test_parse_ref_round_trip():
    for text in ["explicit:0", "family:f1[3]", "family:f2[n]", "family:f2[n-1]", "family:d[n+2]"]:
        assert str(parse_ref(text)) == text


# -- properties ------------------------------------------------------------------------

RHOS = [F(1, 2), F(1, 3), F(2, 3), F(3, 4)]


@st.composite
def partitions(draw):
    inner = draw(st.lists(st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=40), max_size=3, unique=True))
    explicit = sorted({F(0), F(1), *inner})
    families = {}
    rho_at = {}
    for i in range(draw(st.integers(0, 4))):
        alpha = draw(st.sampled_from(explicit))
        side = draw(st.sampled_from(["below", "above"]))
        if (side == "below" and alpha == 0) or (side == "above" and alpha == 1):
            continue
        rho = rho_at.setdefault(alpha, draw(st.sampled_from(RHOS)))
        room = alpha if side == "below" else 1 - alpha
        mag = draw(st.fractions(min_value=F(1, 50), max_value=1, max_denominator=50)) * room
        n0 = draw(st.integers(1, 3))
        beta = (-mag if side == "below" else mag) / rho**n0
        families[f"g{i}"] = [alpha, beta, rho, n0]
    raw = {"ambient": [0, 1], "explicit": explicit, "families": families}
    try:
        return validate_partition(raw)
    except PartitionError:
        assume(False)


@given(partitions())
def test_enumeration_matches_brute_force_sort(P):
    pts = merged_order(P).points(12)
    vals = [v for v, _ in pts]
    assert vals == sorted(vals) and len(set(vals)) == len(vals)
    assert all(P.value(r) == v for v, r in pts)
    assert set(P.explicit.values()) <= set(vals)
    for fid, fam in P.families.items():
        for n in range(fam.n0, fam.n0 + 5):
            assert fam.value(n) in vals
    assert set(P.derived_set) == {f.alpha for f in P.families.values()}
    assert set(P.derived_set) <= set(P.explicit.values())


@given(partitions(), st.fractions(min_value=0, max_value=1, max_denominator=10**4))
def test_locate_consistent_with_order(P, t):
    kind, where = locate(P, t)
    if kind == "point":
        assert P.value(where) == t
    else:
        lo, hi = P.value(where.left), P.value(where.right)
        assert lo < t < hi
        assert P.next_point(lo) == where.right and P.prev_point(hi) == where.left


@given(partitions())
def test_gap_closures_cover_the_interval(P):
    pts = merged_order(P).points(10)
    glist = merged_order(P).gap_list(10)
    covered = sorted((P.value(g.left), P.value(g.right)) for g in glist)
    for (a, b), (c, d) in zip(covered, covered[1:]):
        assert b <= c  # pairwise disjoint
    # only the cut tails are missing: between consecutive listed points either a gap or a truncation
    for (v1, _), (v2, _) in zip(pts, pts[1:]):
        in_gap = (v1, v2) in covered
        cut = any(P.is_accumulation(v) for v in (v1, v2))
        assert in_gap or cut

import itertools

import pytest

import oracles
from interchain.boundary import (
    PropertyTuple,
    antichains,
    check_best_accountability,
    derived_da,
    down_closure,
    enumerate_upper_boundary,
    format_property_family,
    lift_to_systems,
    marker,
    parse_property_family,
    parse_property_tuple,
    property_dominates,
    scalar_mesh_resilience,
    timestamping_over,
    timestamping_tuple,
    to_mask,
    up_closure,
)
from interchain.quorum import (
    ChainSystems,
    check_interchain_da_condition,
    check_interchain_safety_tradeoff,
    check_interchain_slashable_tradeoff,
    tendermint_systems,
)

K2 = [
    "(∅, {{0,1}}, ⊥)",
    "({{0}}, {{1}}, {{0}})",
    "({{1}}, {{0}}, {{1}})",
    "({{0,1}}, {{0},{1}}, {{0,1}})",
]


def test_antichain_counts_are_dedekind_numbers():
    assert [len(antichains(m)) for m in range(5)] == [2, 3, 6, 20, 168]


def test_closures_match_explicit_sets():
    fam = frozenset({to_mask({0}), to_mask({1, 2})})
    ups = {to_mask(s) for s in oracles.up([frozenset({0}), frozenset({1, 2})], range(3))}
    downs = {to_mask(s) for s in oracles.down([frozenset({0}), frozenset({1, 2})], range(3))}
    assert {x for x in range(8) if up_closure(fam, 3) >> x & 1} == ups
    assert {x for x in range(8) if down_closure(fam, 3) >> x & 1} == downs


def test_family_text_roundtrip():
    for text in ("∅", "{{}}", "{{0},{1,2}}", "⊥"):
        assert format_property_family(parse_property_family(text)) == text
    assert parse_property_family("bot") is None
    t = parse_property_tuple(K2[3], 2)
    assert t == timestamping_tuple(1) and t.to_text() == K2[3]
    with pytest.raises(ValueError):
        parse_property_tuple("({{0}}, ⊥, ⊥)", 2)


def test_derived_da():
    assert derived_da(frozenset({to_mask({0, 1})}), 2) is None
    assert derived_da(frozenset({to_mask({0}), to_mask({1})}), 2) == frozenset({to_mask({0, 1})})
    assert derived_da(frozenset({0}), 3) == frozenset(to_mask({i}) for i in range(3))


def test_enumerate_two_chains_exact():
    assert [t.to_text() for t in enumerate_upper_boundary(2)] == K2


def test_enumerate_three_chains_contents():
    out = enumerate_upper_boundary(3)
    texts = [t.to_text() for t in out]
    assert "({{0,1},{0,2},{1,2}}, {{}}, {{0},{1},{2}})" in texts
    assert timestamping_tuple(2) in out
    assert len(out) == len(set(out)) == 9
    assert [marker(t) for t in out].count("timestamping") == 4


@pytest.mark.parametrize("k", [1, 2, 3])
def test_enumeration_rechecked_by_brute_force(k):
    out = enumerate_upper_boundary(k)
    fams = [t.families() for t in out]
    for DQ, Ds, Da in fams:
        assert all(oracles.tuple_conditions(DQ, Ds, Da, k, range(k)))
    for a, b in itertools.permutations(fams, 2):
        assert not oracles.tuple_dominates(a, b, k)


def test_dominance_matches_brute_force_on_candidates():
    fams = antichains(2)
    tuples = [PropertyTuple(q, s, derived_da(s, 2), 2) for q in fams for s in fams if s]
    for a, b in itertools.product(tuples, repeat=2):
        assert property_dominates(a, b) == oracles.tuple_dominates(a.families(), b.families(), 2)


def test_da_restriction_keeps_timestamping_on_subsets():
    out = enumerate_upper_boundary(3, [0])
    assert all(all(to_mask({0}) & q for q in t.DQ) for t in out)
    assert any(marker(t) == "timestamping" for t in out)


def test_best_accountability():
    for k in (2, 3):
        assert check_best_accountability(k)


def test_enumerate_rejects_bad_input():
    with pytest.raises(ValueError):
        enumerate_upper_boundary(0)
    with pytest.raises(ValueError):
        enumerate_upper_boundary(2, [5])


def test_markers():
    assert marker(timestamping_over([0, 2], 3)) == "timestamping"
    assert marker(PropertyTuple.of([], [[0, 1]], None, 2)) == "trivial"


def _two_chains():
    return ChainSystems((tendermint_systems(1, range(4)), tendermint_systems(1, range(4, 8))))


def test_lifted_timestamping_passes_checkers():
    ch = _two_chains()
    lifted = lift_to_systems(timestamping_tuple(1), ch)
    assert check_interchain_safety_tradeoff(lifted.Q, lifted.Bs, ch)
    assert check_interchain_slashable_tradeoff(lifted.Q, lifted.Ba, ch)
    assert check_interchain_da_condition(lifted.Q, [0], ch)
    assert all(len(q) == 6 for q in lifted.Q.members())
    with pytest.raises(ValueError):
        lift_to_systems(timestamping_tuple(2), ch)


def test_scalar_mesh_resilience():
    assert scalar_mesh_resilience([1, 1]) == (1, 4)
    assert scalar_mesh_resilience([1, 2, 3]) == (1, 9)
    with pytest.raises(ValueError):
        scalar_mesh_resilience([2, 1])

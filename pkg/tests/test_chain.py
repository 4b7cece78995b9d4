import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interchain.chain import (
    GENESIS_PARENT,
    BlockStore,
    ChainConfig,
    ChainState,
    InvalidQC,
    QuorumCert,
    SafetyGuardError,
    UnknownBlock,
    ValidatorId,
    conflicting,
    finalize,
    genesis,
    is_prefix,
    make_block,
    verify_qc,
)


def qc(block, chain, idx):
    return QuorumCert(block.digest, block.height, {ValidatorId(chain, i) for i in idx})


def test_make_block_height_and_digest():
    store = BlockStore()
    g = store.ensure_genesis(0)
    assert g.height == 0 and g.parent == GENESIS_PARENT
    b1 = make_block(store, 0, g.digest, ["tx1"])
    assert b1.height == 1 and b1.parent == g.digest
    again = make_block(BlockStore([genesis(0)]), 0, g.digest, ["tx1"])
    assert again.digest == b1.digest
    assert make_block(store, 0, g.digest, ["tx2"]).digest != b1.digest
    assert genesis(0).digest != genesis(1).digest


def test_make_block_unknown_parent():
    store = BlockStore()
    with pytest.raises(UnknownBlock):
        make_block(store, 0, "deadbeef", [])


def test_verify_qc_threshold():
    cfg = ChainConfig.threshold(4, 3)
    g = genesis(0)
    assert verify_qc(qc(g, 0, {0, 1, 2}), cfg)
    assert not verify_qc(qc(g, 0, {0, 1}), cfg)
    assert verify_qc(qc(g, 0, range(4)), cfg)
    assert not verify_qc(qc(g, 1, {0, 1, 2}), cfg)  # signers from another chain


def test_config_rejects_foreign_quorums():
    with pytest.raises(ValueError):
        ChainConfig(3, ChainConfig.threshold(4, 3).quorum_system)


def test_is_prefix_cases():
    store = BlockStore()
    g = store.ensure_genesis(0)
    a = make_block(store, 0, g.digest, ["a"])
    b = make_block(store, 0, g.digest, ["b"])
    c = make_block(store, 0, a.digest, ["c"])
    assert is_prefix(g.digest, c.digest, store)
    assert is_prefix(c.digest, c.digest, store)
    assert not is_prefix(a.digest, b.digest, store) and not is_prefix(b.digest, a.digest, store)
    assert conflicting(b.digest, c.digest, store)
    with pytest.raises(UnknownBlock):
        is_prefix("nope", c.digest, store)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_is_prefix_partial_order(seed):
    rng = random.Random(seed)
    store = BlockStore()
    digests = [store.ensure_genesis(0).digest]
    for i in range(12):
        digests.append(make_block(store, 0, rng.choice(digests), [f"t{i}"]).digest)
    for a, b, c in itertools.product(digests, repeat=3):
        if is_prefix(a, b, store) and is_prefix(b, c, store):
            assert is_prefix(a, c, store)
    for a, b in itertools.product(digests, repeat=2):
        if is_prefix(a, b, store) and is_prefix(b, a, store):
            assert a == b


def test_finalize_honest_and_guard():
    cfg = ChainConfig.threshold(4, 3)
    store = BlockStore()
    st_ = ChainState(cfg, store)
    g = store.ensure_genesis(0)
    a = make_block(store, 0, g.digest, ["a"])
    b = make_block(store, 0, g.digest, ["b"])
    finalize(st_, 1, qc(a, 0, {0, 1, 2}))
    assert a.digest in st_.finalized
    finalize(st_, 2, qc(a, 0, {0, 1, 2}))
    assert st_.finalized[a.digest] == 1
    with pytest.raises(SafetyGuardError):
        finalize(st_, 2, qc(b, 0, {1, 2, 3}))
    with pytest.raises(InvalidQC):
        finalize(st_, 2, qc(b, 0, {1, 2}))


def test_finalize_under_fault_allows_fork_and_intersection_bound():
    cfg = ChainConfig.threshold(4, 3)
    store = BlockStore()
    st_ = ChainState(cfg, store, allow_conflicts=True)
    g = store.ensure_genesis(0)
    a = make_block(store, 0, g.digest, ["a"])
    b = make_block(store, 0, g.digest, ["b"])
    qa, qb = qc(a, 0, {0, 1, 2}), qc(b, 0, {1, 2, 3})
    finalize(st_, 1, qa)
    finalize(st_, 1, qb)
    assert sorted(st_.finalized_tips()) == sorted([a.digest, b.digest])
    for f in (1, 2):
        n, q = 3 * f + 1, 2 * f + 1
        for s1, s2 in itertools.combinations(itertools.combinations(range(n), q), 2):
            assert len(set(s1) & set(s2)) >= 2 * q - n == f + 1

import pytest
from hypothesis import given
from hypothesis import strategies as st

from interchain.chain import ChainConfig, QuorumCert, ValidatorId, make_block
from interchain.timestamp import (
    Checkpoint,
    ClientView,
    ForkChoiceError,
    checkpoint_valid,
    extract_checkpoints,
    fork_choice_multi,
    fork_choice_single,
    provider_path,
    sanitize,
    select_providers,
)

QUORUM = {0, 1, 2}


def signers(chain, idx=QUORUM):
    return frozenset(ValidatorId(chain, i) for i in idx)


class Fixture:
    """A hand-built view over consumer 0 and providers 1, 2 (n=4, q=3 each)."""

    def __init__(self, chains=2, observer="c"):
        self.configs = {i: ChainConfig.threshold(4, 3, chain=i) for i in range(chains)}
        self.view = ClientView(observer, 0, self.configs)

    def block(self, chain, parent, payload=(), finalized=True, payload_visible=True, idx=QUORUM):
        b = make_block(self.view.store, chain, parent, payload)
        q = QuorumCert(b.digest, b.height, signers(chain, idx)) if finalized else None
        self.view.observe(b, q, payload_visible)
        return b

    def genesis(self, chain):
        from interchain.chain import genesis

        return genesis(chain).digest

    def ckpt(self, b, idx=QUORUM):
        return Checkpoint(b.chain, b.digest, b.height, signers(b.chain, idx))


def test_sanitize_examples():
    L = ["B1", "B2", "B3", "B4"]
    assert sanitize(L, ["B1", "B2", "B3", "B4'"]) == ("B1", "B2", "B3", "B4", "B4'")
    assert sanitize(("B1", "B2", "B3", "B4", "B4'"), ["B1", "B2", "B3", "B4", "B5"]) == (
        "B1", "B2", "B3", "B4", "B4'", "B5")
    assert sanitize([], ["a", "b"]) == ("a", "b")
    assert sanitize(["a", "b"], ["a"]) == ("a", "b")


@given(st.lists(st.integers(0, 9), unique=True), st.lists(st.integers(0, 9)))
def test_sanitize_prefix_and_inclusion(L, C):
    out = sanitize(L, C)
    assert out[: len(L)] == tuple(L)
    assert set(C) <= set(out)
    assert len(set(out)) == len(out)


def test_checkpoint_valid():
    cfg = ChainConfig.threshold(4, 3)
    assert checkpoint_valid(Checkpoint(0, "x", 1, signers(0)), cfg)
    assert not checkpoint_valid(Checkpoint(0, "x", 1, signers(0, {0, 1})), cfg)
    assert checkpoint_valid(Checkpoint(0, "x", 1, signers(0, range(4))), cfg)
    assert not checkpoint_valid(Checkpoint(1, "x", 1, signers(1)), cfg)


def test_extract_checkpoints_order_and_fork():
    fx = Fixture()
    c1 = fx.block(0, fx.genesis(0), ["tx"])
    c2 = fx.block(0, c1.digest)
    p = fx.genesis(1)
    for h in range(1, 4):
        payload = [fx.ckpt(c1)] if h == 2 else []
        p = fx.block(1, p if isinstance(p, str) else p.digest, payload)
    tip = p.digest
    # fork at height 4; both branches carry a checkpoint at height 5
    a4 = fx.block(1, tip, ["a"])
    b4 = fx.block(1, tip, ["b"])
    fx.block(1, a4.digest, [fx.ckpt(c2)])
    fx.block(1, b4.digest, [fx.ckpt(c2)])
    got = extract_checkpoints(fx.view, 1, 0)
    assert [c.target for c in got] == [c1.digest]
    assert extract_checkpoints(Fixture().view, 1) == []


def _three_checkpoints(fx, withhold_second=False, invalid_between=False):
    c = [fx.block(0, fx.genesis(0), ["t1"])]
    c.append(fx.block(0, c[0].digest, ["t2"], payload_visible=not withhold_second))
    c.append(fx.block(0, c[1].digest, ["t3"]))
    payload = [fx.ckpt(c[0])]
    if invalid_between:
        payload.append(fx.ckpt(c[2], {0, 1}))
    payload += [fx.ckpt(c[1]), fx.ckpt(c[2])]
    p = fx.genesis(1)
    for ck in payload:
        p = fx.block(1, p, [ck]).digest
    return [b.digest for b in c]


def test_fork_choice_single_all_available():
    fx = Fixture()
    c = _three_checkpoints(fx)
    assert fork_choice_single(fx.view, 0, 1) == (tuple(c), False)


def test_fork_choice_single_stalls_on_withheld():
    fx = Fixture()
    c = _three_checkpoints(fx, withhold_second=True)
    assert fork_choice_single(fx.view, 0, 1) == ((c[0],), True)
    ledger, stalled = fork_choice_single(fx.view, 0, 1, stall_rule=False)
    assert not stalled and ledger == (c[0],)  # later checkpoints still need the withheld ancestor


def test_fork_choice_single_skips_invalid():
    fx = Fixture()
    c = _three_checkpoints(fx, invalid_between=True)
    assert fork_choice_single(fx.view, 0, 1) == (tuple(c), False)


def test_fork_choice_single_stalls_on_unfinalized():
    fx = Fixture()
    b = fx.block(0, fx.genesis(0), ["t"], finalized=False)
    fx.block(1, fx.genesis(1), [fx.ckpt(b)])
    assert fork_choice_single(fx.view, 0, 1) == ((), True)


def test_fork_choice_multi_base_case_and_errors():
    fx = Fixture()
    _three_checkpoints(fx)
    assert fork_choice_multi(fx.view, [0, 1]) == fork_choice_single(fx.view, 0, 1)
    with pytest.raises(ForkChoiceError):
        fork_choice_multi(fx.view, [0])


def test_fork_choice_multi_two_levels_headers_only_above_consumer():
    fx = Fixture(chains=3)
    c1 = fx.block(0, fx.genesis(0), ["t1"])
    p1 = fx.block(1, fx.genesis(1), [fx.ckpt(c1)], payload_visible=False)
    fx.block(2, fx.genesis(2), [Checkpoint(1, p1.digest, p1.height, signers(1))])
    # provider 1's payload is hidden, but the client reads the checkpoint through its own view
    ledger, stalled = fork_choice_multi(fx.view, [0, 1, 2])
    assert not stalled and ledger == (c1.digest,)


def test_provider_path_and_select():
    edges = {(0, 1), (1, 2), (0, 2)}
    assert provider_path(edges, 0, {1, 2}) == (0, 1, 2)
    assert provider_path(edges, 0, {2}) == (0, 2)
    with pytest.raises(ForkChoiceError):
        provider_path(edges, 0, set())
    with pytest.raises(ForkChoiceError):
        provider_path({(0, 1)}, 0, {2})
    fx = Fixture(chains=3)
    v = select_providers(fx.view, {1, 2})
    assert v.chain_order == (0, 1, 2) and set(v.configs) == {0, 1, 2}
    assert set(select_providers(fx.view, {1}).configs) == {0, 1}

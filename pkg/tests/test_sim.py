import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interchain.chain import ChainConfig
from interchain.sim import (
    Censor,
    Corrupt,
    Equivocate,
    InsufficientCorruption,
    NetworkModel,
    Scenario,
    ScenarioError,
    Simulation,
    StallChain,
    Trace,
    Withhold,
    inject_equivocation,
    load_scenario,
    run,
    scenario_from_dict,
    scenario_to_dict,
)
from interchain.sim import scenarios as S


def test_same_seed_same_bytes():
    sc = S.safety_cell(1, {0, 1})
    a, b = run(sc, 11), run(sc, 11)
    assert a.to_jsonl() == b.to_jsonl() and a.fingerprint() == b.fingerprint()


def test_seed_changes_relay_delays():
    sc = S.honest(1, horizon=30, network=NetworkModel("partially_synchronous", 3, 0))
    prints = {run(sc, s).fingerprint() for s in range(5)}
    assert len(prints) > 1


def test_honest_run_ledger_is_consumer_prefix():
    trace = run(S.honest(1, horizon=25))
    s = trace.summary
    assert not s["violations"]
    ledgers = [c["ledger"] for c in s["clients"].values()]
    assert ledgers[0] == ledgers[1] and len(ledgers[0]) > 15
    blocks = trace.blocks()
    heights = [blocks[d]["height"] for d in ledgers[0]]
    assert heights == list(range(1, len(heights) + 1))
    assert all(blocks[d]["chain"] == 0 for d in ledgers[0])


def test_trace_roundtrip(tmp_path):
    trace = run(S.safety_cell(1, {0, 1}))
    path = tmp_path / "t.jsonl"
    trace.write(path)
    back = Trace.read(path)
    assert back.fingerprint() == trace.fingerprint()
    assert back.summary == json.loads(json.dumps(trace.summary))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 3), st.integers(0, 4))
def test_relay_delivery_within_bound(seed, delta, gst):
    """Under partial synchrony every honest checkpoint lands by max(t, gst) + delta + 1."""
    sc = S.honest(1, horizon=20, network=NetworkModel("partially_synchronous", delta, gst))
    trace = run(sc, seed)
    blocks = trace.blocks()
    produced = {d: b["round"] for d, b in blocks.items() if b["chain"] == 0}
    for d, b in blocks.items():
        if b["chain"] != 1:
            continue
        for tx in b["payload"]:
            if isinstance(tx, dict):
                t = produced[tx["target"]]
                assert b["round"] <= max(t, gst) + delta + 1


def test_censor_requires_corruption():
    sc = S.honest(1, horizon=5)
    bad = Scenario(sc.chains, sc.clients, adversary=(Corrupt(1, (0,)), StallChain(1)), horizon=5)
    with pytest.raises(InsufficientCorruption):
        run(bad)
    ok = Scenario(sc.chains, sc.clients, adversary=(Corrupt(1, (0, 1)), StallChain(1)), horizon=5)
    assert run(ok).summary["clients"]["c1"]["length"] == 0


def test_equivocation_requires_corruption():
    cfg = ChainConfig.threshold(4, 3)
    with pytest.raises(InsufficientCorruption):
        inject_equivocation(cfg, {1})
    a, b = inject_equivocation(cfg, {0, 1})
    assert a & b <= {0, 1} and len(a) == len(b) == 3
    sc = S.safety_cell(1, {0})
    weak = Scenario(sc.chains, sc.clients, adversary=(Corrupt(0, (0,)), Equivocate(0, 2, (("c1",), ("c2",)))))
    with pytest.raises(InsufficientCorruption):
        run(weak)


def test_withhold_stalls_then_reveals():
    base = S.honest(1, horizon=14)
    hide = Withhold(0, 2, ("c1",), reveal_round=9)
    sim = Simulation(Scenario(base.chains, base.clients, txs=base.txs, horizon=14, adversary=(hide,)))
    trace = sim.run()
    hist = trace.ledger_history()["c1"]
    stalled = [(r, len(e)) for r, e, s in hist if s]
    assert stalled and all(n == 1 for _, n in stalled)
    assert all(r < 9 for r, _ in stalled)
    assert len(trace.final_ledger("c1")) == len(trace.final_ledger("c2"))
    assert not trace.summary["violations"]


def test_censored_transaction_never_lands():
    sc = S.honest(1, horizon=20)
    cen = Scenario(
        sc.chains, sc.clients, txs=sc.txs, horizon=20,
        adversary=(Corrupt(0, (0, 1)), Censor(0, "tx5", until_round=12)),
    )
    trace = run(cen)
    # without an honest quorum the chain halts once the adversary stops driving it
    assert trace.first_inclusion("c1", "tx5") is None
    assert trace.first_inclusion("c1", "tx0") is not None


def test_cadence_two_checkpoints_even_heights():
    sc = S.honest(1, horizon=20)
    sc2 = Scenario(sc.chains, sc.clients, txs=sc.txs, horizon=20, cadence=2)
    blocks = run(sc2).blocks()
    targets = [tx["height"] for b in blocks.values() if b["chain"] == 1 for tx in b["payload"] if isinstance(tx, dict)]
    assert targets and all(h % 2 == 0 for h in targets)


def test_two_providers_chain_topology():
    trace = run(S.honest(2, horizon=25))
    assert not trace.summary["violations"]
    assert trace.summary["clients"]["c1"]["length"] > 10


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.update(chains=d["chains"][:1]), "consumer"),
        (lambda d: d["adversary"].append({"type": "explode", "chain": 0}), "unknown directive"),
        (lambda d: d["adversary"].append({"type": "corrupt", "chain": 0, "validators": [9]}), "no validators"),
        (lambda d: d["adversary"].append({"type": "censor", "chain": 7}), "unknown chain"),
        (lambda d: d["network"].update(mode="async"), "network mode"),
        (lambda d: d["clients"][0].update(providers=[5]), "provider"),
    ],
)
def test_scenario_errors(mutate, message):
    d = scenario_to_dict(S.honest(1))
    mutate(d)
    with pytest.raises(ScenarioError, match=message):
        scenario_from_dict(d)


def test_scenario_json_roundtrip(tmp_path):
    sc = S.data_withholding()
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario_to_dict(sc)))
    assert load_scenario(path) == sc
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "bad.json")

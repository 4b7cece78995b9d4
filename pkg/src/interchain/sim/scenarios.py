"""Ready-made scenarios: honest runs, the safety/liveness fault matrix, and the DA attack."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .scenario import (
    Censor,
    ChainSpec,
    ClientSpec,
    Corrupt,
    Equivocate,
    NetworkModel,
    Scenario,
    StallChain,
    TxInput,
)

CLIENTS = ("c1", "c2")
PROBE = "probe"


def tendermint_chain(f: int, latency: int = 1) -> ChainSpec:
    return ChainSpec(3 * f + 1, f"threshold:{2 * f + 1}", latency)


def _chains(fs, latencies) -> tuple:
    latencies = latencies or [1] * len(fs)
    return tuple(tendermint_chain(f, T) for f, T in zip(fs, latencies))


def _clients(k: int, stall_rule: bool = True, names=CLIENTS) -> tuple:
    return tuple(ClientSpec(n, tuple(range(1, k + 1)), stall_rule) for n in names)


def honest(k: int = 1, fs=None, *, horizon: int = 50, latencies=None, network: NetworkModel | None = None, seed: int = 0) -> Scenario:
    fs = fs or [1] * (k + 1)
    return Scenario(
        chains=_chains(fs, latencies),
        clients=_clients(k),
        network=network or NetworkModel(),
        txs=tuple(TxInput(r, f"tx{r}") for r in range(0, horizon, 5)),
        horizon=horizon,
        seed=seed,
    )


def safety_cell(k: int, compromised, fs=None, *, horizon: int = 20, seed: int = 0) -> Scenario:
    """Every chain in ``compromised`` runs a split-brain attack, one branch per client.

    Branches are never revealed; the consumer forks at height 3 and providers
    at height 1, so consumer branches are checkpointed into provider branches.
    """
    fs = fs or [1] * (k + 1)
    adversary = []
    for i in sorted(compromised):
        adversary.append(Corrupt(i, tuple(range(fs[i] + 1))))
        adversary.append(Equivocate(i, 3 if i == 0 else 1, tuple((c,) for c in CLIENTS)))
    return Scenario(
        chains=_chains(fs, None),
        clients=_clients(k),
        adversary=tuple(adversary),
        txs=tuple(TxInput(r, f"tx{r}") for r in range(0, horizon, 3)),
        horizon=horizon,
        seed=seed,
    )


@dataclass(frozen=True)
class LivenessCell:
    scenario: Scenario
    probe_round: int
    bound: int  # round by which the probe must be in every client ledger


def liveness_cell(
    k: int,
    faulty,
    fs=None,
    *,
    latencies=None,
    delta: int = 2,
    gst: int = 3,
    relay_delay: int | None = None,
    probe_round: int = 1,
    seed: int = 0,
) -> LivenessCell:
    """Chains in ``faulty`` lose their honest quorum and halt or censor.

    The consumer censors the probe transaction; providers alternate between
    halting outright (odd index) and dropping every checkpoint (even index).
    """
    fs = fs or [1] * (k + 1)
    latencies = latencies or [1] * (k + 1)
    net = NetworkModel("partially_synchronous", delta, gst, relay_delay)
    adversary = []
    for i in sorted(faulty):
        adversary.append(Corrupt(i, tuple(range(fs[i] + 1))))
        if i == 0:
            adversary.append(Censor(0, PROBE))
        elif i % 2:
            adversary.append(StallChain(i))
        else:
            adversary.append(Censor(i, "checkpoints"))
    hop = net.hop
    bound = max(gst, probe_round) + sum(latencies) + k * hop
    sc = Scenario(
        chains=_chains(fs, latencies),
        clients=_clients(k),
        network=net,
        adversary=tuple(adversary),
        txs=(TxInput(probe_round, PROBE),),
        horizon=bound + 3,
        seed=seed,
    )
    return LivenessCell(sc, probe_round, bound)


def data_withholding(stall_rule: bool = True, *, f: int = 1, horizon: int = 15, seed: int = 0) -> Scenario:
    """Consumer split-brain where one branch is shown only to a late client.

    Checkpoints of the branch that ``c1`` cannot see are ordered first on the
    provider. With the stalling rule ``c1`` halts there; without it ``c1``
    skips ahead onto the other branch while ``c2`` follows the first one.
    """
    return Scenario(
        chains=_chains([f, f], None),
        clients=_clients(1, stall_rule),
        adversary=(
            Corrupt(0, tuple(range(f + 1))),
            Equivocate(0, 2, (("c2",), ("c1", "c2"))),
        ),
        txs=tuple(TxInput(r, f"tx{r}") for r in range(0, horizon, 2)),
        horizon=horizon,
        seed=seed,
    )


def patterns(k: int) -> list[frozenset]:
    """All 2^(k+1) subsets of chain indices, smallest first."""
    chains = range(k + 1)
    return [frozenset(c) for n in range(k + 2) for c in itertools.combinations(chains, n)]

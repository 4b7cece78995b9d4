"""Deterministic discrete-round simulator.

Each chain is modelled as an idealized BFT instance: it emits a finalized
block every ``latency`` rounds after GST while some quorum is fully honest, or
while the adversary chooses to drive it (equivocation, censorship). Relayers
carry checkpoints along topology edges; clients re-run fork choice each round.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ..chain import Block, BlockStore, ChainConfig, Digest, QuorumCert, ValidatorId, make_block, verify_qc
from ..forensics import interchain_forensics, ledger_violation
from ..quorum import ThresholdFamily
from ..timestamp import Checkpoint, ClientView, fork_choice_multi, provider_path
from .scenario import (
    Censor,
    Delay,
    Equivocate,
    Scenario,
    ScenarioError,
    StallChain,
    Withhold,
    active,
)
from .trace import Trace


class InsufficientCorruption(ScenarioError):
    """The corrupted set is too small for the requested adversarial behaviour."""


def inject_equivocation(cfg: ChainConfig, corrupted, branches: int = 2) -> list[frozenset]:
    """Signer index sets for ``branches`` conflicting QCs whose overlaps are all corrupted.

    Threshold chains take the corrupted set plus disjoint chunks of honest
    validators; explicit quorum systems are searched for a fitting set of members.
    """
    C = frozenset(corrupted)
    fam = cfg.quorum_system
    if isinstance(fam, ThresholdFamily):
        if len(C) >= fam.q:
            return [C] * branches
        need = fam.q - len(C)
        honest = sorted(fam.universe - C)
        if need * branches > len(honest):
            raise InsufficientCorruption(
                f"chain {cfg.chain}: {len(C)} corrupted validators cannot sign {branches} conflicting quorums of size {fam.q}"
            )
        return [C | frozenset(honest[j * need:(j + 1) * need]) for j in range(branches)]
    members = sorted(fam.members(), key=lambda m: (len(m), sorted(m)))
    for combo in itertools.combinations_with_replacement(members, branches):
        if all(a & b <= C for a, b in itertools.combinations(combo, 2)):
            return list(combo)
    raise InsufficientCorruption(f"chain {cfg.chain}: no {branches} quorums overlap only in corrupted validators")


def honest_relayer_step(view: ClientView, round_: int, sent: set, cadence: int = 1) -> list[tuple[int, Checkpoint]]:
    """Checkpoints for finalized blocks in ``view`` not yet relayed.

    Every finalized, fork-free block whose height is a multiple of ``cadence``
    yields one checkpoint per outgoing topology edge. ``sent`` is updated.
    """
    out = []
    for consumer, provider in sorted(view.edges):
        for d in view.finalized_chain(consumer)[1:]:
            b = view.store[d]
            if b.height % cadence or (d, provider) in sent:
                continue
            sent.add((d, provider))
            out.append((provider, Checkpoint.from_qc(consumer, view.qcs[d])))
    return out


@dataclass
class _Branch:
    label: int
    tip: Digest
    pending: list = field(default_factory=list)
    included: set = field(default_factory=set)
    audience: frozenset | None = None  # None: everyone; empty: hidden
    reveal: int | None = None
    signers: frozenset | None = None
    marker: str | None = None


@dataclass
class _Meta:
    block: Block
    qc: QuorumCert
    audience: frozenset | None
    reveal: int | None
    forked: bool = False


def _aud(a: frozenset | None) -> list | None:
    return None if a is None else sorted(a)


class Simulation:
    def __init__(self, scenario: Scenario, seed: int | None = None) -> None:
        self.sc = scenario
        self.seed = scenario.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.configs = scenario.configs()
        self.corrupt = scenario.corrupted()
        self.names = frozenset(c.name for c in scenario.clients)
        self.store = BlockStore()
        self.trace = Trace(self.seed)
        self.metas: list[_Meta] = []
        self.branches: dict[int, list[_Branch]] = {}
        for c in self.configs:
            g = self.store.ensure_genesis(c)
            self.branches[c] = [_Branch(0, g.digest)]
        self.queue: list[tuple] = []  # (deliver_round, seq, provider, ckpt, sender_audience)
        self.senders: dict[Checkpoint, frozenset | None] = {}
        self._seq = itertools.count()
        self.withholds: list[Withhold] = []
        self.equivocations = {d.chain: d for d in scenario.adversary if isinstance(d, Equivocate)}
        self.order = self._chain_order()
        self.views = {
            c.name: ClientView(c.name, 0, self.configs, edges=frozenset(scenario.topology))
            for c in scenario.clients
        }
        self.paths = {}
        for c in scenario.clients:
            providers = c.providers or tuple(range(1, len(self.configs)))
            try:
                self.paths[c.name] = provider_path(scenario.topology, 0, providers)
            except ValueError as exc:
                raise ScenarioError(f"client {c.name}: {exc}") from exc
        self._check_directives()
        for d in scenario.adversary:
            if isinstance(d, Withhold):
                self.inject_withholding(d)

    # -- setup ----------------------------------------------------------------

    def _chain_order(self) -> list[int]:
        """Topological order of the relay graph so zero-delay hops land in the same round."""
        succ: dict[int, set] = {c: set() for c in self.configs}
        indeg = {c: 0 for c in self.configs}
        for a, b in set(self.sc.topology):
            succ[a].add(b)
            indeg[b] += 1
        ready = sorted(c for c, d in indeg.items() if d == 0)
        out = []
        while ready:
            c = ready.pop(0)
            out.append(c)
            for n in sorted(succ[c]):
                indeg[n] -= 1
                if indeg[n] == 0:
                    ready.append(n)
            ready.sort()
        return out if len(out) == len(self.configs) else sorted(self.configs)

    def _honest(self, chain: int) -> frozenset:
        return frozenset(range(self.configs[chain].n)) - self.corrupt[chain]

    def _honest_quorum(self, chain: int) -> bool:
        return self.configs[chain].quorum_system.has_subset_of(self._honest(chain))

    def _check_directives(self) -> None:
        for d in self.sc.adversary:
            if isinstance(d, (Censor, StallChain)) and self._honest_quorum(d.chain):
                raise InsufficientCorruption(
                    f"{type(d).__name__} on chain {d.chain}: an honest quorum remains, the chain cannot be halted or censored"
                )
        for chain, d in self.equivocations.items():
            inject_equivocation(self.configs[chain], self.corrupt[chain], len(d.audiences))

    def inject_withholding(self, d: Withhold) -> None:
        self.withholds.append(d)

    # -- visibility -------------------------------------------------------------

    def _sees(self, meta: _Meta, client: str, t: int) -> bool:
        return meta.audience is None or client in meta.audience or (meta.reveal is not None and t >= meta.reveal)

    def _payload_visible(self, meta: _Meta, client: str, t: int) -> bool:
        b = meta.block
        for w in self.withholds:
            if w.chain != b.chain or w.height != b.height:
                continue
            if (w.observers == "all" or client in w.observers) and (w.reveal_round is None or t < w.reveal_round):
                return False
        return True

    # -- chain production -------------------------------------------------------

    def _driven(self, chain: int, t: int) -> bool:
        if chain in self.equivocations:
            return True
        return any(isinstance(d, Censor) and d.chain == chain and active(d, t) for d in self.sc.adversary)

    def _stalled(self, chain: int, t: int) -> bool:
        return any(isinstance(d, StallChain) and d.chain == chain and active(d, t) for d in self.sc.adversary)

    def _censored(self, chain: int, tx, t: int) -> bool:
        for d in self.sc.adversary:
            if not (isinstance(d, Censor) and d.chain == chain and active(d, t)):
                continue
            if d.target == "all":
                return True
            if d.target == "checkpoints" and isinstance(tx, Checkpoint):
                return True
            if tx == d.target:
                return True
        return False

    def _split(self, chain: int, t: int) -> None:
        d = self.equivocations[chain]
        trunk = self.branches[chain][0]
        signers = inject_equivocation(self.configs[chain], self.corrupt[chain], len(d.audiences))
        self.branches[chain] = [
            _Branch(
                j,
                trunk.tip,
                [x for x in trunk.pending if self._routes(self.senders.get(x), frozenset(aud))],
                set(trunk.included),
                frozenset(aud),
                d.reveal_round,
                signers[j],
                f"equivocation:{chain}:{j}",
            )
            for j, aud in enumerate(d.audiences)
        ]
        self.trace.emit(t, "fork", chain=chain, height=d.fork_height, audiences=[sorted(a) for a in d.audiences])

    def _produce(self, chain: int, t: int) -> None:
        cfg = self.configs[chain]
        if t < self.sc.network.gst or t % cfg.latency or self._stalled(chain, t):
            return
        if not self._honest_quorum(chain) and not self._driven(chain, t):
            return
        eq = self.equivocations.get(chain)
        if eq is not None and len(self.branches[chain]) == 1 and self.branches[chain][0].signers is None:
            if self.store[self.branches[chain][0].tip].height + 1 == eq.fork_height:
                self._split(chain, t)
        default = self._honest(chain) if self._honest_quorum(chain) else frozenset(range(cfg.n))
        for br in self.branches[chain]:
            txs = [x for x in br.pending if x not in br.included and not self._censored(chain, x, t)]
            payload = ([br.marker] if br.marker else []) + txs
            br.marker = None
            block = make_block(self.store, chain, br.tip, payload)
            idx = br.signers if br.signers is not None else default
            qc = QuorumCert(block.digest, block.height, frozenset(ValidatorId(chain, i) for i in idx))
            if not verify_qc(qc, cfg):
                raise AssertionError(f"chain {chain}: produced QC without a quorum")
            br.tip = block.digest
            br.included.update(txs)
            br.pending = [x for x in br.pending if x not in br.included]
            meta = _Meta(block, qc, br.audience, br.reveal, br.signers is not None)
            self.metas.append(meta)
            self.trace.emit(
                t,
                "block",
                chain=chain,
                branch=br.label,
                digest=block.digest,
                parent=block.parent,
                height=block.height,
                payload=_payload_record(block.payload),
                signers=[list(s) for s in sorted(qc.signers)],
                audience=_aud(br.audience),
                reveal=br.reveal,
            )
            self._relay(meta, t)

    # -- relaying ---------------------------------------------------------------

    def _relay(self, meta: _Meta, t: int) -> None:
        b = meta.block
        if b.height % self.sc.cadence:
            return
        net = self.sc.network
        for consumer, provider in sorted(set(self.sc.topology)):
            if consumer != b.chain:
                continue
            ckpt = Checkpoint.from_qc(b.chain, meta.qc)
            if meta.forked:
                deliver = t  # the adversary submits checkpoints of its own branches at once
            else:
                base = max(t, net.gst)
                deliver = base + self.rng.randint(0, net.hop)
                for d in self.sc.adversary:
                    if isinstance(d, Delay) and d.chain == provider:
                        deliver = min(max(deliver, d.until_round), base + net.delta)
            self.queue.append((deliver, next(self._seq), provider, ckpt, meta.audience))
            self.trace.emit(t, "relay_send", source=b.chain, provider=provider, target=b.digest, deliver_round=deliver)

    def _deliver(self, chain: int, t: int) -> None:
        due = sorted(m for m in self.queue if m[2] == chain and m[0] <= t)
        if not due:
            return
        self.queue = [m for m in self.queue if not (m[2] == chain and m[0] <= t)]
        for _, _, provider, ckpt, sender in due:
            self.senders[ckpt] = sender
            for br in self.branches[provider]:
                if self._routes(sender, br.audience):
                    br.pending.append(ckpt)
            self.trace.emit(t, "relay_deliver", provider=provider, target=ckpt.target)

    def _routes(self, sender: frozenset | None, receiver: frozenset | None) -> bool:
        s = self.names if sender is None else sender
        r = self.names if receiver is None else receiver
        return not s or not r or bool(s & r)

    # -- clients ----------------------------------------------------------------

    def _sync(self, name: str, t: int) -> None:
        view = self.views[name]
        view.round = t
        for meta in self.metas:
            d = meta.block.digest
            if d not in view.store:
                if self._sees(meta, name, t):
                    view.observe(meta.block, meta.qc, self._payload_visible(meta, name, t))
            elif d not in view.payloads and self._payload_visible(meta, name, t):
                view.payloads.add(d)
                view._final_cache.clear()

    # -- main loop --------------------------------------------------------------

    def run(self) -> Trace:
        sc = self.sc
        self.trace.emit(
            0,
            "setup",
            corrupted={str(c): sorted(v) for c, v in self.corrupt.items() if v},
            clients=sorted(self.names),
            k=sc.k,
        )
        last: dict[str, tuple] = {}
        for t in range(sc.horizon + 1):
            for chain, d in sorted(self.equivocations.items()):
                if d.reveal_round == t:
                    self.trace.emit(t, "reveal", chain=chain)
            for tx in sc.txs:
                if tx.round == t:
                    for br in self.branches[0]:
                        br.pending.append(tx.id)
                    self.trace.emit(t, "tx", id=tx.id)
            for chain in self.order:
                self._deliver(chain, t)
                self._produce(chain, t)
            for c in sc.clients:
                self._sync(c.name, t)
                ledger, stalled = fork_choice_multi(self.views[c.name], self.paths[c.name], stall_rule=c.stall_rule)
                if last.get(c.name) != (ledger, stalled):
                    last[c.name] = (ledger, stalled)
                    self.trace.emit(t, "ledger", client=c.name, entries=list(ledger), stalled=stalled, length=len(ledger))
        self.trace.summary = self._summary(last)
        return self.trace

    def _summary(self, last: dict) -> dict:
        violation = ledger_violation(self.trace)
        proofs = interchain_forensics(self.trace, sorted(self.configs)) if violation else {}
        return {
            "seed": self.seed,
            "clients": {
                name: {"length": len(led), "stalled": st, "ledger": list(led)}
                for name, (led, st) in sorted(last.items())
            },
            "violations": [violation] if violation else [],
            "forensics": {
                str(c): sorted(list(v) for v in p.culprits) for c, p in sorted(proofs.items()) if p is not None
            },
        }


def _payload_record(payload: tuple) -> list:
    return [tx.to_record() if isinstance(tx, Checkpoint) else tx for tx in payload]


def run(scenario: Scenario, seed: int | None = None) -> Trace:
    """Execute ``scenario`` for rounds 0..horizon and return its trace."""
    return Simulation(scenario, seed).run()

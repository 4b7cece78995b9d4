"""Interchain timestamping client: checkpoints, sanitization and fork choice."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .chain import (
    Block,
    BlockStore,
    ChainConfig,
    Digest,
    QuorumCert,
    UnknownBlock,
    ValidatorId,
    genesis,
    signer_indices,
    verify_qc,
)

LedgerSeq = tuple  # tuple[Digest, ...]


@dataclass(frozen=True)
class Checkpoint:
    """Succinct finality record of a consumer block, carried as a provider transaction."""

    consumer_chain: int
    target: Digest
    height: int
    signers: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "signers", frozenset(ValidatorId(*s) for s in self.signers))

    @classmethod
    def from_qc(cls, chain: int, qc: QuorumCert) -> "Checkpoint":
        return cls(chain, qc.target, qc.height, qc.signers)

    def to_record(self) -> dict:
        return {
            "ckpt": self.consumer_chain,
            "target": self.target,
            "height": self.height,
            "signers": [list(s) for s in sorted(self.signers)],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Checkpoint":
        return cls(rec["ckpt"], rec["target"], rec["height"], frozenset(tuple(s) for s in rec["signers"]))


class ForkChoiceError(ValueError):
    pass


@dataclass
class ClientView:
    """Everything one observer has seen up to ``round``.

    ``store`` holds observed headers, ``payloads`` the digests whose transaction
    data is available, ``qcs`` the observed quorum certificates. ``edges`` is the
    channel topology as (consumer, provider) pairs.
    """

    observer: str
    round: int
    configs: dict[int, ChainConfig]
    store: BlockStore = field(default_factory=BlockStore)
    qcs: dict[Digest, QuorumCert] = field(default_factory=dict)
    payloads: set = field(default_factory=set)
    edges: frozenset = frozenset()
    chain_order: tuple | None = None

    def __post_init__(self) -> None:
        for c in self.configs:
            g = self.store.ensure_genesis(c)
            self.payloads.add(g.digest)
        if not self.edges:
            idx = sorted(self.configs)
            self.edges = frozenset(zip(idx, idx[1:]))
        self._final_cache: dict[Digest, bool] = {}

    # -- observation -------------------------------------------------------

    def observe(self, block: Block, qc: QuorumCert | None = None, payload: bool = True) -> None:
        self.store.add(block)
        if qc is not None:
            self.qcs[block.digest] = qc
        if payload:
            self.payloads.add(block.digest)
        self._final_cache.clear()

    # -- predicates --------------------------------------------------------

    def is_finalized(self, digest: Digest) -> bool:
        if digest in self._final_cache:
            return self._final_cache[digest]
        b = self.store.get(digest)
        ok = False
        if b is not None:
            if b.is_genesis:
                ok = b.digest == genesis(b.chain).digest
            else:
                qc = self.qcs.get(digest)
                cfg = self.configs.get(b.chain)
                ok = (
                    qc is not None
                    and cfg is not None
                    and qc.height == b.height
                    and verify_qc(qc, cfg)
                    and self.is_finalized(b.parent)
                )
        self._final_cache[digest] = ok
        return ok

    def has_payload(self, digest: Digest) -> bool:
        b = self.store.get(digest)
        return b is not None and digest in self.payloads and self.observer not in b.withheld_from

    def is_available(self, digest: Digest) -> bool:
        try:
            return all(self.has_payload(b.digest) for b in self.store.ancestry(digest))
        except UnknownBlock:
            return False

    def finalized_chain(self, chain: int) -> list[Digest]:
        """Fork-free finalized chain from genesis; stops before the first fork."""
        children: dict[Digest, list[Digest]] = {}
        for b in self.store.blocks_of(chain):
            if not b.is_genesis and self.is_finalized(b.digest):
                children.setdefault(b.parent, []).append(b.digest)
        cur = genesis(chain).digest
        out = [cur]
        while len(children.get(cur, ())) == 1:
            cur = children[cur][0]
            out.append(cur)
        return out


# ---------------------------------------------------------------------------


def sanitize(ledger: Sequence[Digest], chain: Sequence[Digest]) -> LedgerSeq:
    """Concatenate ``ledger`` and ``chain``, dropping later duplicates."""
    seen = set()
    out = []
    for d in itertools.chain(ledger, chain):
        if d not in seen:
            seen.add(d)
            out.append(d)
    return tuple(out)


def checkpoint_valid(ckpt: Checkpoint, cfg: ChainConfig) -> bool:
    if ckpt.consumer_chain != cfg.chain:
        return False
    idx = signer_indices(ckpt.signers, cfg.chain)
    if idx is None or any(i >= cfg.n for i in idx):
        return False
    return cfg.quorum_system.has_subset_of(idx)


def _checkpoints_in(block: Block, consumer: int | None) -> list[Checkpoint]:
    return [
        tx
        for tx in block.payload
        if isinstance(tx, Checkpoint) and (consumer is None or tx.consumer_chain == consumer)
    ]


def extract_checkpoints(
    view: ClientView,
    provider: int,
    consumer: int | None = None,
    provider_ledger: Sequence[Digest] | None = None,
) -> list[Checkpoint]:
    """Checkpoints in provider order.

    Without ``provider_ledger`` the provider's fork-free finalized header chain
    is read from the view; with it, the given (timestamped) header sequence is
    used as the provider chain.
    """
    digests = view.finalized_chain(provider) if provider_ledger is None else provider_ledger
    out: list[Checkpoint] = []
    for d in digests:
        b = view.store.get(d)
        if b is None or b.chain != provider:
            continue
        out.extend(_checkpoints_in(b, consumer))
    return out


def _target_chain(view: ClientView, ckpt: Checkpoint, full: bool, known: set) -> list[Digest] | None:
    b = view.store.get(ckpt.target)
    if b is None or b.chain != ckpt.consumer_chain or b.height != ckpt.height:
        return None
    try:
        blocks = view.store.ancestry(ckpt.target)[1:]
    except UnknownBlock:
        return None
    for blk in blocks:
        if blk.digest in known:
            continue
        if not view.is_finalized(blk.digest):
            return None
        if full and not view.has_payload(blk.digest):
            return None
    return [blk.digest for blk in blocks]


def fork_choice_single(
    view: ClientView,
    consumer: int,
    provider: int,
    *,
    provider_ledger: Sequence[Digest] | None = None,
    full: bool = True,
    stall_rule: bool = True,
) -> tuple[LedgerSeq, bool]:
    """Timestamped ledger of ``consumer`` blocks ordered by ``provider``.

    Invalid checkpoints are skipped. The first valid checkpoint whose chain is
    unavailable or unfinalized stops processing and sets the stall flag.
    ``stall_rule=False`` skips such checkpoints instead; it exists only to
    demonstrate what the rule protects against.
    """
    cfg = view.configs[consumer]
    ledger: LedgerSeq = ()
    known: set = set()
    for ckpt in extract_checkpoints(view, provider, consumer, provider_ledger):
        if not checkpoint_valid(ckpt, cfg):
            continue
        chain = _target_chain(view, ckpt, full, known)
        if chain is None:
            if stall_rule:
                return ledger, True
            continue
        ledger = sanitize(ledger, chain)
        known.update(chain)
    return ledger, False


def fork_choice_multi(
    view: ClientView, chain_order: Sequence[int], *, stall_rule: bool = True
) -> tuple[LedgerSeq, bool]:
    """Iterate the single-provider rule from the top provider down to ``chain_order[0]``."""
    order = list(chain_order)
    if len(order) < 2:
        raise ForkChoiceError("chain_order needs a consumer and at least one provider")
    provider_ledger = None
    stalled = False
    ledger: LedgerSeq = ()
    for i in range(len(order) - 1, 0, -1):
        ledger, st = fork_choice_single(
            view,
            order[i - 1],
            order[i],
            provider_ledger=provider_ledger,
            full=(i - 1 == 0),
            stall_rule=stall_rule,
        )
        stalled = stalled or st
        provider_ledger = ledger
    return ledger, stalled


def provider_path(edges: Iterable[tuple[int, int]], consumer: int, subset: Iterable[int]) -> tuple[int, ...]:
    """Order ``subset`` into a telescoping path consumer → p1 → p2 → ... along ``edges``."""
    subset = set(subset) - {consumer}
    if not subset:
        raise ForkChoiceError("provider subset is empty")
    succ: dict[int, set[int]] = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)

    def walk(cur: int, left: frozenset, path: tuple) -> tuple | None:
        if not left:
            return path
        for nxt in sorted(succ.get(cur, ()) & left):
            found = walk(nxt, left - {nxt}, path + (nxt,))
            if found:
                return found
        return None

    path = walk(consumer, frozenset(subset), (consumer,))
    if path is None:
        raise ForkChoiceError(f"providers {sorted(subset)} do not form a path from {consumer} in the topology")
    return path


def select_providers(view: ClientView, subset: Iterable[int], consumer: int = 0) -> ClientView:
    """Restrict ``view`` to ``consumer`` plus the chosen providers."""
    path = provider_path(view.edges, consumer, subset)
    keep = set(path)
    restricted = replace(
        view,
        configs={c: cfg for c, cfg in view.configs.items() if c in keep},
        edges=frozenset(e for e in view.edges if e[0] in keep and e[1] in keep),
        chain_order=path,
    )
    restricted._final_cache = {}
    return restricted

"""Blocks, quorum certificates and per-chain finalization."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple

from .quorum import Family, ThresholdFamily, threshold

Digest = str

#: parent pointer carried by every genesis block
GENESIS_PARENT: Digest = "0" * 16


class ValidatorId(NamedTuple):
    chain: int
    index: int

    def __str__(self) -> str:
        return f"{self.chain}:{self.index}"


class ChainError(Exception):
    """Base class for block-store and finalization errors."""


class UnknownBlock(ChainError, KeyError):
    pass


class InvalidQC(ChainError):
    pass


class SafetyGuardError(ChainError):
    """An honest chain was asked to finalize a block conflicting with its history."""


def canonical(obj: Any) -> Any:
    """Reduce payload items to JSON-compatible values with a stable layout."""
    if hasattr(obj, "to_record"):
        return obj.to_record()
    if isinstance(obj, (list, tuple)):
        return [canonical(x) for x in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(canonical(x) for x in obj)
    return obj


def content_digest(parent: Digest, height: int, chain: int, payload: Iterable) -> Digest:
    blob = json.dumps([parent, height, chain, canonical(list(payload))], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Block:
    digest: Digest
    parent: Digest
    height: int
    chain: int
    payload: tuple = ()
    withheld_from: frozenset = frozenset()

    @property
    def is_genesis(self) -> bool:
        return self.height == 0

    def header(self) -> dict:
        return {"digest": self.digest, "parent": self.parent, "height": self.height, "chain": self.chain}


def genesis(chain: int) -> Block:
    return Block(content_digest(GENESIS_PARENT, 0, chain, ()), GENESIS_PARENT, 0, chain, ())


@dataclass(frozen=True)
class QuorumCert:
    target: Digest
    height: int
    signers: frozenset  # frozenset[ValidatorId]

    def __post_init__(self) -> None:
        object.__setattr__(self, "signers", frozenset(ValidatorId(*s) for s in self.signers))

    def to_record(self) -> dict:
        return {"target": self.target, "height": self.height, "signers": [list(s) for s in sorted(self.signers)]}


@dataclass(frozen=True)
class ChainConfig:
    """Static description of one chain.

    ``quorum_system`` is a family over validator indices ``0..n-1``.
    """

    n: int
    quorum_system: Family
    latency: int = 1
    checks_data_availability: bool = True
    chain: int = 0

    def __post_init__(self) -> None:
        if not self.quorum_system.universe <= frozenset(range(self.n)):
            raise ValueError("every quorum must be a subset of the chain's validators")
        if self.latency < 1:
            raise ValueError("latency must be at least one round")

    @classmethod
    def threshold(cls, n: int, q: int, *, latency: int = 1, checks_data_availability: bool = True, chain: int = 0) -> "ChainConfig":
        return cls(n, threshold(n, q), latency, checks_data_availability, chain)

    @classmethod
    def tendermint(cls, f: int, *, latency: int = 1, chain: int = 0) -> "ChainConfig":
        return cls.threshold(3 * f + 1, 2 * f + 1, latency=latency, chain=chain)

    def validators(self) -> list[ValidatorId]:
        return [ValidatorId(self.chain, i) for i in range(self.n)]

    def describe_quorum(self) -> str:
        q = self.quorum_system
        return f"threshold:{q.q}" if isinstance(q, ThresholdFamily) else q.to_text()


def signer_indices(signers: Iterable, chain: int) -> frozenset | None:
    """Validator indices of ``signers``, or None if any signer sits on another chain."""
    out = set()
    for s in signers:
        s = ValidatorId(*s)
        if s.chain != chain:
            return None
        out.add(s.index)
    return frozenset(out)


def verify_qc(qc: QuorumCert, cfg: ChainConfig) -> bool:
    idx = signer_indices(qc.signers, cfg.chain)
    if idx is None or any(i >= cfg.n for i in idx):
        return False
    return cfg.quorum_system.has_subset_of(idx)


class BlockStore:
    """Append-only store of blocks for any number of chains."""

    def __init__(self, blocks: Iterable[Block] = ()) -> None:
        self._blocks: dict[Digest, Block] = {}
        for b in blocks:
            self.add(b)

    def add(self, block: Block) -> Block:
        if block.digest in self._blocks:
            return self._blocks[block.digest]
        if not block.is_genesis and block.parent not in self._blocks:
            raise UnknownBlock(block.parent)
        self._blocks[block.digest] = block
        return block

    def ensure_genesis(self, chain: int) -> Block:
        return self.add(genesis(chain))

    def __contains__(self, digest: object) -> bool:
        return digest in self._blocks

    def __getitem__(self, digest: Digest) -> Block:
        try:
            return self._blocks[digest]
        except KeyError:
            raise UnknownBlock(digest) from None

    def get(self, digest: Digest) -> Block | None:
        return self._blocks.get(digest)

    def __iter__(self):
        return iter(self._blocks.values())

    def __len__(self) -> int:
        return len(self._blocks)

    def blocks_of(self, chain: int) -> list[Block]:
        return [b for b in self._blocks.values() if b.chain == chain]

    def ancestry(self, digest: Digest) -> list[Block]:
        """Chain from genesis to ``digest`` (inclusive)."""
        out = []
        b = self[digest]
        while True:
            out.append(b)
            if b.is_genesis:
                break
            b = self[b.parent]
        out.reverse()
        return out


def make_block(store: BlockStore, chain: int, parent: Digest, payload: Iterable = (), withheld_from: Iterable = ()) -> Block:
    par = store.get(parent)
    if par is None:
        raise UnknownBlock(parent)
    if par.chain != chain:
        raise ChainError(f"parent {parent} belongs to chain {par.chain}, not {chain}")
    payload = tuple(payload)
    height = par.height + 1
    block = Block(content_digest(parent, height, chain, payload), parent, height, chain, payload, frozenset(withheld_from))
    return store.add(block)


def is_prefix(a: Digest, b: Digest, store: BlockStore) -> bool:
    """True iff block ``a`` is an ancestor of, or equal to, block ``b``."""
    ba, bb = store[a], store[b]
    while bb.height > ba.height:
        bb = store[bb.parent]
    return bb.digest == ba.digest


def conflicting(a: Digest, b: Digest, store: BlockStore) -> bool:
    return not is_prefix(a, b, store) and not is_prefix(b, a, store)


@dataclass
class ChainState:
    """Finalization record of one chain.

    ``allow_conflicts`` marks a chain under a safety fault; only then may two
    conflicting blocks both be finalized.
    """

    cfg: ChainConfig
    store: BlockStore
    finalized: dict[Digest, int] = field(default_factory=dict)
    qcs: dict[Digest, QuorumCert] = field(default_factory=dict)
    allow_conflicts: bool = False

    def __post_init__(self) -> None:
        g = self.store.ensure_genesis(self.cfg.chain)
        self.finalized.setdefault(g.digest, 0)

    @property
    def genesis(self) -> Digest:
        return genesis(self.cfg.chain).digest

    def finalized_tips(self) -> list[Digest]:
        """Finalized blocks with no finalized child."""
        parents = {self.store[d].parent for d in self.finalized}
        return sorted(d for d in self.finalized if d not in parents)


def finalize(state: ChainState, round_: int, qc: QuorumCert) -> ChainState:
    if not verify_qc(qc, state.cfg):
        raise InvalidQC(f"QC on {qc.target} does not contain a quorum")
    block = state.store[qc.target]
    if block.chain != state.cfg.chain or block.height != qc.height:
        raise InvalidQC(f"QC height/chain does not match block {qc.target}")
    if qc.target in state.finalized:
        return state
    if not state.allow_conflicts:
        for d in state.finalized:
            if conflicting(d, qc.target, state.store):
                raise SafetyGuardError(f"{qc.target} conflicts with finalized {d}")
    for b in state.store.ancestry(qc.target):
        state.finalized.setdefault(b.digest, round_)
    state.qcs[qc.target] = qc
    return state

"""Safety-violation detection, culprit identification and the timestamp monitor."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .chain import ChainConfig, ValidatorId, verify_qc, QuorumCert
from .timestamp import ClientView, checkpoint_valid, extract_checkpoints


class NoViolation(LookupError):
    """No conflicting finalized pair exists where one was expected."""


@dataclass(frozen=True)
class Attestation:
    digest: str
    height: int
    signer: ValidatorId


@dataclass(frozen=True)
class ViolationEvidence:
    chain: int
    first: tuple  # (digest, height, signers)
    second: tuple


@dataclass(frozen=True)
class ForensicProof:
    chain: int
    culprits: frozenset
    evidence: dict  # ValidatorId -> (Attestation, Attestation)

    def to_record(self) -> dict:
        return {"chain": self.chain, "culprits": [list(v) for v in sorted(self.culprits)]}


@dataclass(frozen=True)
class Alert:
    proof: ForensicProof
    timestamped: tuple  # (digest, height) carried by the provider
    local: tuple  # (digest, height) finalized in the consumer view


def detect_violation(ledger_a: Sequence, ledger_b: Sequence) -> int | None:
    """First index where the two sequences diverge, or None if one prefixes the other."""
    for i, (x, y) in enumerate(zip(ledger_a, ledger_b)):
        if x != y:
            return i
    return None


def _proof(chain: int, a: tuple, b: tuple) -> ForensicProof:
    (da, ha, sa), (db, hb, sb) = a, b
    culprits = frozenset(sa) & frozenset(sb)
    evidence = {v: (Attestation(da, ha, v), Attestation(db, hb, v)) for v in culprits}
    return ForensicProof(chain, culprits, evidence)


def _signers(rec: dict) -> frozenset:
    return frozenset(ValidatorId(*s) for s in rec["signers"])


def find_conflict(blocks: dict[str, dict], chain: int) -> ViolationEvidence | None:
    """Lowest conflicting pair of finalized blocks on ``chain`` in a trace's block records."""
    mine = {d: b for d, b in blocks.items() if b["chain"] == chain}

    def ancestor(a: str, b: str) -> bool:
        cur = mine.get(b)
        ha = mine[a]["height"]
        while cur is not None and cur["height"] > ha:
            cur = mine.get(cur["parent"])
        return cur is not None and cur["digest"] == a

    best = None
    ordered = sorted(mine.values(), key=lambda b: (b["height"], b["digest"]))
    for x, y in itertools.combinations(ordered, 2):
        if ancestor(x["digest"], y["digest"]) or ancestor(y["digest"], x["digest"]):
            continue
        key = (max(x["height"], y["height"]), x["digest"], y["digest"])
        if best is None or key < best[0]:
            best = (key, x, y)
    if best is None:
        return None
    _, x, y = best
    return ViolationEvidence(
        chain,
        (x["digest"], x["height"], _signers(x)),
        (y["digest"], y["height"], _signers(y)),
    )


def forensic_identify(trace, chain: int, cfg: ChainConfig | None = None) -> ForensicProof:
    """Culprits on ``chain``: validators that signed both sides of a conflict."""
    ev = find_conflict(trace.blocks(), chain)
    if ev is None:
        raise NoViolation(f"no conflicting finalized blocks on chain {chain}")
    if cfg is not None:
        for digest, height, signers in (ev.first, ev.second):
            if not verify_qc(QuorumCert(digest, height, signers), cfg):
                raise NoViolation(f"conflicting block {digest} lacks a valid QC")
    return _proof(chain, ev.first, ev.second)


def ledger_violation(trace) -> dict | None:
    """First pair of client ledger snapshots (any clients, any rounds) that conflict."""
    snaps = []
    for client, hist in trace.ledger_history().items():
        for r, entries, _ in hist:
            snaps.append((client, r, entries))
    for (c1, r1, l1), (c2, r2, l2) in itertools.combinations(snaps, 2):
        idx = detect_violation(l1, l2)
        if idx is not None:
            return {"clients": [c1, c2], "rounds": [r1, r2], "index": idx}
    return None


def interchain_forensics(trace, chains: Sequence[int]) -> dict[int, ForensicProof | None]:
    out: dict[int, ForensicProof | None] = {}
    for c in chains:
        try:
            out[c] = forensic_identify(trace, c)
        except NoViolation:
            out[c] = None
    return out


def monitor_poll(provider_view: ClientView, consumer_view: ClientView, consumer: int = 0, provider: int = 1) -> Alert | None:
    """Compare timestamped consumer headers against the locally finalized consumer chain.

    Raises an alert when a valid timestamp names a block that conflicts with the
    consumer client's chain at the same height. Silent when the provider itself
    timestamps the local branch.
    """
    cfg = consumer_view.configs[consumer]
    local_chain = consumer_view.finalized_chain(consumer)
    by_height = {consumer_view.store[d].height: d for d in local_chain}
    for ckpt in extract_checkpoints(provider_view, provider, consumer):
        if not checkpoint_valid(ckpt, cfg):
            continue
        mine = by_height.get(ckpt.height)
        if mine is None or mine == ckpt.target:
            continue
        qc = consumer_view.qcs.get(mine)
        if qc is None:
            continue
        proof = _proof(consumer, (ckpt.target, ckpt.height, ckpt.signers), (mine, qc.height, qc.signers))
        return Alert(proof, (ckpt.target, ckpt.height), (mine, qc.height))
    return None

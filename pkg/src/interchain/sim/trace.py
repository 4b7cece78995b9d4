"""Simulation traces: an ordered event log plus views derived from it."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator


def _dump(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


@dataclass
class Trace:
    seed: int
    events: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def emit(self, round_: int, kind: str, **fields) -> None:
        self.events.append({"round": round_, "type": kind, **fields})

    # -- serialization ----------------------------------------------------

    def lines(self) -> Iterator[str]:
        for ev in self.events:
            yield _dump(ev)
        yield _dump({"type": "summary", **self.summary})

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        events, summary = [], {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"trace line {lineno}: {exc.msg}") from exc
            if rec.get("type") == "summary":
                summary = {k: v for k, v in rec.items() if k != "type"}
            else:
                events.append(rec)
        return cls(summary.get("seed", 0), events, summary)

    @classmethod
    def read(cls, path: str | Path) -> "Trace":
        return cls.from_jsonl(Path(path).read_text())

    # -- derived views ------------------------------------------------------

    def of_type(self, kind: str) -> list[dict]:
        return [e for e in self.events if e["type"] == kind]

    def setup(self) -> dict:
        found = self.of_type("setup")
        return found[0] if found else {}

    def corrupted(self) -> dict[int, frozenset]:
        raw = self.setup().get("corrupted", {})
        return {int(c): frozenset(v) for c, v in raw.items()}

    def blocks(self) -> dict[str, dict]:
        return {e["digest"]: e for e in self.of_type("block")}

    def clients(self) -> list[str]:
        return list(self.setup().get("clients", []))

    def ledger_history(self) -> dict[str, list[tuple[int, tuple, bool]]]:
        out: dict[str, list] = {c: [] for c in self.clients()}
        for e in self.of_type("ledger"):
            out.setdefault(e["client"], []).append((e["round"], tuple(e["entries"]), e["stalled"]))
        return out

    def final_ledger(self, client: str) -> tuple:
        hist = self.ledger_history().get(client, [])
        return hist[-1][1] if hist else ()

    def ledger_at(self, client: str, round_: int) -> tuple:
        led: tuple = ()
        for r, entries, _ in self.ledger_history().get(client, []):
            if r > round_:
                break
            led = entries
        return led

    def first_inclusion(self, client: str, tx: str) -> int | None:
        """First round at which ``tx`` is in a block of ``client``'s ledger."""
        blocks = self.blocks()
        for r, entries, _ in self.ledger_history().get(client, []):
            if any(tx in blocks[d]["payload"] for d in entries if d in blocks):
                return r
        return None

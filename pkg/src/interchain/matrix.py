"""Fault-matrix validation of timestamping: run every safety and liveness cell, compare with predictions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .boundary import PropertyTuple, timestamping_tuple, to_mask
from .forensics import forensic_identify, NoViolation
from .sim import run
from .sim import scenarios as S


@dataclass(frozen=True)
class CellResult:
    kind: str  # "safety" or "liveness"
    faulty: frozenset
    expected: bool  # predicted safe / live
    observed: bool
    detail: str = ""
    forensics_ok: bool = True

    @property
    def key(self) -> str:
        return ",".join(str(i) for i in sorted(self.faulty))

    @property
    def passed(self) -> bool:
        return self.expected == self.observed and self.forensics_ok


def predicted_safe(t: PropertyTuple, unsafe) -> bool:
    m = to_mask(unsafe)
    return any(m & d == m for d in t.Ds)


def predicted_live(t: PropertyTuple, faulty, chains: int) -> bool:
    live = ((1 << chains) - 1) & ~to_mask(faulty)
    return any(q & live == q for q in t.DQ)


def _check_culprits(trace, fs: Sequence[int]) -> tuple[bool, str]:
    truth = trace.corrupted()
    total = 0
    for chain, f in enumerate(fs):
        try:
            proof = forensic_identify(trace, chain)
        except NoViolation:
            return False, f"no conflict on chain {chain}"
        idx = {v.index for v in proof.culprits if v.chain == chain}
        if len(idx) < f + 1 or not idx <= truth.get(chain, frozenset()):
            return False, f"chain {chain}: culprits {sorted(idx)}"
        total += len(idx)
    return True, f"culprits={total}"


def safety_matrix(k: int, fs: Sequence[int] | None = None, expect: dict | None = None) -> list[CellResult]:
    fs = list(fs or [1] * (k + 1))
    tup = timestamping_tuple(k)
    out = []
    for pattern in S.patterns(k):
        trace = run(S.safety_cell(k, pattern, fs))
        safe = not trace.summary["violations"]
        expected = predicted_safe(tup, pattern)
        key = ",".join(str(i) for i in sorted(pattern))
        if expect and key in expect:
            expected = bool(expect[key])
        ok, detail = (True, "")
        if not safe:
            ok, detail = _check_culprits(trace, fs)
        out.append(CellResult("safety", pattern, expected, safe, detail, ok))
    return out


def liveness_matrix(
    k: int, fs: Sequence[int] | None = None, expect: dict | None = None, *, relay_delay: int | None = None, seeds: Sequence[int] = (0,)
) -> list[CellResult]:
    fs = list(fs or [1] * (k + 1))
    tup = timestamping_tuple(k)
    out = []
    for pattern in S.patterns(k):
        live = True
        worst = -1
        bound = 0
        for seed in seeds:
            cell = S.liveness_cell(k, pattern, fs, relay_delay=relay_delay, seed=seed)
            trace = run(cell.scenario)
            bound = cell.bound
            for c in trace.clients():
                r = trace.first_inclusion(c, S.PROBE)
                if r is None or r > cell.bound:
                    live = False
                else:
                    worst = max(worst, r)
        expected = predicted_live(tup, pattern, k + 1)
        key = ",".join(str(i) for i in sorted(pattern))
        if expect and key in expect:
            expected = bool(expect[key])
        detail = f"included by {worst} <= {bound}" if live else f"not included by {bound}"
        out.append(CellResult("liveness", pattern, expected, live, detail))
    return out


def load_expectations(path: str | Path) -> dict:
    """Expectation overrides: {"safety": {"0,1": false, ...}, "liveness": {...}}."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("expectation file must hold a JSON object")
    return data


def format_table(rows: list[CellResult]) -> str:
    lines = [f"{'property':<9} {'faulty':<8} {'expected':<9} {'observed':<9} {'result':<6} detail"]
    for r in rows:
        lines.append(
            f"{r.kind:<9} {'{' + r.key + '}':<8} {str(r.expected):<9} {str(r.observed):<9} "
            f"{'pass' if r.passed else 'FAIL':<6} {r.detail}".rstrip()
        )
    return "\n".join(lines)

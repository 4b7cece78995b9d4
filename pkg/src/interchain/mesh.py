"""Zone-graph security analysis: bounded timestamping paths vs. cross-staking."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

EXACT_LIMIT = 20
BEAM_WIDTH = 256
DEFAULT_PS = (0.0, 0.1, 0.5, 1.0)


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Channel:
    src: str
    dst: str
    transfers_per_hour: float = 0.0


@dataclass
class ZoneGraph:
    caps: dict[str, float] = field(default_factory=dict)  # insertion order = file order
    channels: list[Channel] = field(default_factory=list)

    def __post_init__(self) -> None:
        for c in self.channels:
            for z in (c.src, c.dst):
                if z not in self.caps:
                    raise MeshError(f"channel {c.src}->{c.dst} references unknown zone {z!r}")
        for z, cap in self.caps.items():
            if cap < 0 or not math.isfinite(cap):
                raise MeshError(f"zone {z!r} has invalid market cap {cap}")

    @property
    def zones(self) -> list[str]:
        return list(self.caps)

    def successors(self, zone: str) -> list[str]:
        return sorted({c.dst for c in self.channels if c.src == zone and c.dst != zone})

    def total_cap(self) -> float:
        return math.fsum(self.caps.values())


def zone_graph_from_dict(data: dict) -> ZoneGraph:
    caps: dict[str, float] = {}
    for z in data.get("zones", []):
        zid = str(z["id"])
        if zid in caps:
            raise MeshError(f"duplicate zone id {zid!r}")
        caps[zid] = float(z["market_cap"])
    channels = [
        Channel(str(c["from"]), str(c["to"]), float(c.get("transfers_per_hour", 0.0)))
        for c in data.get("channels", [])
    ]
    return ZoneGraph(caps, channels)


def load_zone_graph(path: str | Path) -> ZoneGraph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MeshError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return zone_graph_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: malformed zone graph ({exc!r})") from exc


# -- path security ------------------------------------------------------------------


@dataclass(frozen=True)
class PathSecurity:
    econ: float
    censor: float
    path: tuple
    exact: bool = True


def _security(g: ZoneGraph, path: Sequence[str], exact: bool = True) -> PathSecurity:
    caps = [g.caps[z] for z in path]
    return PathSecurity(math.fsum(caps) / 3, min(caps) / 3, tuple(path), exact)


def _better(a: tuple, b: tuple | None) -> bool:
    """Compare (weight, path) candidates: heavier first, then lexicographically smaller path."""
    return b is None or a[0] > b[0] or (a[0] == b[0] and list(a[1]) < list(b[1]))


def best_path_security(g: ZoneGraph, consumer: str, k: int, *, through: bool = False) -> PathSecurity:
    """Heaviest simple directed path with at most ``k`` edges starting at ``consumer``.

    Exact layered search over (visited set, endpoint) for graphs up to
    EXACT_LIMIT zones, a beam search beyond that (``exact=False``).
    ``through=True`` also admits paths that pass through ``consumer``.
    """
    if consumer not in g.caps:
        raise MeshError(f"unknown zone {consumer!r}")
    if k < 0:
        raise MeshError("k must be non-negative")
    if through:
        return _through_paths(g, consumer, k)
    index = {z: i for i, z in enumerate(g.zones)}
    order = g.zones
    succ = {z: g.successors(z) for z in order}

    def weight(mask: int) -> float:
        return math.fsum(g.caps[order[i]] for i in range(len(order)) if mask >> i & 1)

    exact = len(order) <= EXACT_LIMIT
    layer = {(1 << index[consumer], consumer): (consumer,)}
    best = (weight(1 << index[consumer]), (consumer,))
    for _ in range(k):
        nxt: dict[tuple, tuple] = {}
        for (mask, end), path in layer.items():
            for z in succ[end]:
                bit = 1 << index[z]
                if mask & bit:
                    continue
                key = (mask | bit, z)
                cand = path + (z,)
                if key not in nxt or list(cand) < list(nxt[key]):
                    nxt[key] = cand
        if not nxt:
            break
        scored = [((weight(m), p), (m, e)) for (m, e), p in nxt.items()]
        if not exact and len(scored) > BEAM_WIDTH:
            scored.sort(key=lambda s: (-s[0][0], list(s[0][1])))
            scored = scored[:BEAM_WIDTH]
        layer = {key: wp[1] for wp, key in scored}
        for wp, _ in scored:
            if _better(wp, best):
                best = wp
    return _security(g, best[1], exact)


def _through_paths(g: ZoneGraph, consumer: str, k: int) -> PathSecurity:
    best: tuple | None = None

    def dfs(path: tuple) -> None:
        nonlocal best
        if consumer in path:
            cand = (math.fsum(g.caps[z] for z in path), path)
            if _better(cand, best):
                best = cand
        if len(path) > k:
            return
        for z in g.successors(path[-1]):
            if z not in path:
                dfs(path + (z,))

    for start in g.zones:
        dfs((start,))
    return _security(g, best[1])


def all_paths_oracle(g: ZoneGraph, consumer: str, k: int) -> PathSecurity:
    """Exhaustive enumeration of simple paths from ``consumer``; reference for tests."""
    best: tuple | None = None

    def dfs(path: tuple) -> None:
        nonlocal best
        cand = (math.fsum(g.caps[z] for z in path), path)
        if _better(cand, best):
            best = cand
        if len(path) > k:
            return
        for z in g.successors(path[-1]):
            if z not in path:
                dfs(path + (z,))

    dfs((consumer,))
    return _security(g, best[1])


def cross_staking_security(g: ZoneGraph, consumer: str, p: float) -> float:
    """Economic security when ``consumer`` borrows stake from its direct providers.

    Each provider j lends at most min(X_j, p/(1-p) * X_i); p = 1 lifts the ratio cap.
    """
    if consumer not in g.caps:
        raise MeshError(f"unknown zone {consumer!r}")
    if not 0.0 <= p <= 1.0:
        raise MeshError(f"power cap must lie in [0, 1], got {p}")
    xi = g.caps[consumer]
    borrowed = []
    for j in g.successors(consumer):
        xj = g.caps[j]
        borrowed.append(xj if p == 1.0 else min(xj, p / (1.0 - p) * xi))
    return (xi + math.fsum(borrowed)) / 3


def global_upper_bound(g: ZoneGraph) -> float:
    """Security of a path through every zone: one third of the total market cap."""
    return g.total_cap() / 3


# -- reports ----------------------------------------------------------------------------


def _p_label(p: float) -> str:
    return f"cs_p{round(p * 100)}"


@dataclass(frozen=True)
class ReportRow:
    zone: str
    k: int
    econ_security_usd: int
    censorship_usd: int
    path: tuple
    cross_staking: tuple  # ((label, usd), ...)
    exact: bool = True


@dataclass
class SecurityReport:
    rows: list[ReportRow]
    ps: tuple = DEFAULT_PS

    def header(self) -> list[str]:
        return ["zone", "k", "econ_security_usd", "censorship_usd", "path"] + [_p_label(p) for p in self.ps]

    def by_zone(self, zone: str) -> list[ReportRow]:
        return sorted((r for r in self.rows if r.zone == zone), key=lambda r: r.k)


def report(g: ZoneGraph, ks: Iterable[int], ps: Iterable[float] = DEFAULT_PS) -> SecurityReport:
    ks, ps = sorted(set(ks)), tuple(ps)
    rows = []
    for zone in g.zones:
        cs = tuple((_p_label(p), round(cross_staking_security(g, zone, p))) for p in ps)
        for k in ks:
            sec = best_path_security(g, zone, k)
            rows.append(ReportRow(zone, k, round(sec.econ), round(sec.censor), sec.path, cs, sec.exact))
    return SecurityReport(rows, ps)


def export_csv(rep: SecurityReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rep.header())
    for r in rep.rows:
        w.writerow([r.zone, r.k, r.econ_security_usd, r.censorship_usd, ">".join(r.path)] + [v for _, v in r.cross_staking])
    return buf.getvalue()


def load_report_csv(text: str) -> SecurityReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    labels = header[5:]
    ps = tuple(int(lbl[len("cs_p"):]) / 100 for lbl in labels)
    rows = []
    for rec in reader:
        rows.append(
            ReportRow(
                rec[0],
                int(rec[1]),
                int(rec[2]),
                int(rec[3]),
                tuple(rec[4].split(">")),
                tuple(zip(labels, (int(v) for v in rec[5:]))),
            )
        )
    return SecurityReport(rows, ps)


def histogram(values: Iterable[float]) -> list[tuple[str, int]]:
    """Counts per power-of-ten decade (``decade`` = floor(log10 v)); zeros are binned as ``zero``."""
    counts: Counter = Counter()
    for v in values:
        counts["zero" if v <= 0 else str(math.floor(math.log10(v)))] += 1
    numeric = sorted((d for d in counts if d != "zero"), key=int)
    out = [("zero", counts["zero"])] if counts["zero"] else []
    return out + [(d, counts[d]) for d in numeric]


def histogram_csv(values: Iterable[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["decade", "count"])
    w.writerows(histogram(values))
    return buf.getvalue()


def synthetic_zones(n: int = 43, total_cap: float = 9.1e9, *, exponent: float = 1.3, rate: float = 60.0) -> ZoneGraph:
    """Fully connected zone graph with Zipf-like caps summing to ``total_cap``."""
    raw = [1.0 / (i + 1) ** exponent for i in range(n)]
    scale = total_cap / math.fsum(raw)
    caps = {f"zone{i:02d}": raw[i] * scale for i in range(n)}
    ids = list(caps)
    channels = [
        Channel(a, b, round(rate / (1 + (i + j) % 7), 3))
        for i, a in enumerate(ids)
        for j, b in enumerate(ids)
        if a != b
    ]
    return ZoneGraph(caps, channels)


def zone_graph_to_dict(g: ZoneGraph) -> dict:
    return {
        "zones": [{"id": z, "market_cap": c} for z, c in g.caps.items()],
        "channels": [{"from": c.src, "to": c.dst, "transfers_per_hour": c.transfers_per_hour} for c in g.channels],
    }

"""Scenario description: chains, topology, clients, network and adversary script."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..chain import ChainConfig
from ..quorum import SetFamily, parse_family, threshold


class ScenarioError(ValueError):
    """Malformed scenario or adversary script."""


@dataclass(frozen=True)
class ChainSpec:
    n: int
    quorum: str = ""  # "threshold:q" or an explicit family like "{{0,1,2},{1,2,3}}"
    latency: int = 1
    checks_da: bool = True

    def config(self, chain: int) -> ChainConfig:
        q = self.quorum or f"threshold:{2 * ((self.n - 1) // 3) + 1}"
        if q.startswith("threshold:"):
            fam = threshold(self.n, int(q.split(":", 1)[1]))
        else:
            parsed = parse_family(q, range(self.n))
            fam = SetFamily(frozenset(range(self.n)), frozenset(parsed.members()))
        return ChainConfig(self.n, fam, self.latency, self.checks_da, chain)


@dataclass(frozen=True)
class ClientSpec:
    name: str
    providers: tuple = ()
    stall_rule: bool = True


@dataclass(frozen=True)
class NetworkModel:
    mode: str = "partially_synchronous"
    delta: int = 1
    gst: int = 0
    relay_delay: int | None = None  # upper bound on relayer hops; defaults to delta

    def __post_init__(self) -> None:
        if self.mode not in ("synchronous", "partially_synchronous"):
            raise ScenarioError(f"unknown network mode {self.mode!r}")
        if self.delta < 0 or self.gst < 0:
            raise ScenarioError("delta and gst must be non-negative")
        if self.mode == "synchronous" and self.gst != 0:
            raise ScenarioError("synchronous networks have gst = 0")
        if self.relay_delay is not None and not 0 <= self.relay_delay <= self.delta:
            raise ScenarioError("relay_delay must lie in [0, delta]")

    @property
    def hop(self) -> int:
        return self.delta if self.relay_delay is None else self.relay_delay


# -- adversary directives -----------------------------------------------------


@dataclass(frozen=True)
class Corrupt:
    chain: int
    validators: tuple


@dataclass(frozen=True)
class Equivocate:
    chain: int
    fork_height: int
    audiences: tuple  # tuple[tuple[str, ...], ...]; an empty audience hides its branch
    reveal_round: int | None = None


@dataclass(frozen=True)
class Censor:
    chain: int
    target: str = "all"  # "all", "checkpoints", or a transaction id
    from_round: int = 0
    until_round: int | None = None


@dataclass(frozen=True)
class Withhold:
    chain: int
    height: int
    observers: tuple | str = "all"
    reveal_round: int | None = None


@dataclass(frozen=True)
class Delay:
    chain: int  # provider chain whose incoming relay messages are delayed
    until_round: int


@dataclass(frozen=True)
class StallChain:
    chain: int
    from_round: int = 0
    until_round: int | None = None


DIRECTIVES = {
    "corrupt": Corrupt,
    "equivocate": Equivocate,
    "censor": Censor,
    "withhold": Withhold,
    "delay": Delay,
    "stall_chain": StallChain,
}


def active(d: Censor | StallChain, round_: int) -> bool:
    return d.from_round <= round_ and (d.until_round is None or round_ < d.until_round)


@dataclass(frozen=True)
class TxInput:
    round: int
    id: str


@dataclass(frozen=True)
class Scenario:
    chains: tuple
    clients: tuple
    network: NetworkModel = field(default_factory=NetworkModel)
    topology: tuple = ()
    adversary: tuple = ()
    txs: tuple = ()
    horizon: int = 30
    seed: int = 0
    cadence: int = 1

    def __post_init__(self) -> None:
        if not self.topology:
            object.__setattr__(self, "topology", tuple((i, i + 1) for i in range(len(self.chains) - 1)))
        self.validate()

    @property
    def k(self) -> int:
        return len(self.chains) - 1

    def configs(self) -> dict[int, ChainConfig]:
        return {i: c.config(i) for i, c in enumerate(self.chains)}

    def corrupted(self) -> dict[int, frozenset]:
        out: dict[int, set] = {i: set() for i in range(len(self.chains))}
        for d in self.adversary:
            if isinstance(d, Corrupt):
                out[d.chain].update(d.validators)
        return {i: frozenset(v) for i, v in out.items()}

    def validate(self) -> None:
        nchains = len(self.chains)
        if nchains < 2:
            raise ScenarioError("need a consumer and at least one provider chain")
        if self.horizon < 0 or self.cadence < 1:
            raise ScenarioError("horizon must be >= 0 and cadence >= 1")
        for i, c in enumerate(self.chains):
            try:
                c.config(i)
            except (ValueError, IndexError) as exc:
                raise ScenarioError(f"chain {i}: {exc}") from exc
        for a, b in self.topology:
            if not (0 <= a < nchains and 0 <= b < nchains) or a == b:
                raise ScenarioError(f"bad topology edge {(a, b)}")
        names = [c.name for c in self.clients]
        if len(set(names)) != len(names):
            raise ScenarioError("client names must be unique")
        for c in self.clients:
            for p in c.providers:
                if not 0 < p < nchains:
                    raise ScenarioError(f"client {c.name}: unknown provider chain {p}")
        known = set(names)
        for d in self.adversary:
            if not 0 <= d.chain < nchains:
                raise ScenarioError(f"{type(d).__name__} references unknown chain {d.chain}")
            if isinstance(d, Corrupt):
                n = self.chains[d.chain].n
                bad = [v for v in d.validators if not 0 <= v < n]
                if bad:
                    raise ScenarioError(f"corrupt: chain {d.chain} has no validators {bad}")
            if isinstance(d, Equivocate):
                for aud in d.audiences:
                    unknown = set(aud) - known
                    if unknown:
                        raise ScenarioError(f"equivocate: unknown observers {sorted(unknown)}")
                if len(d.audiences) < 2:
                    raise ScenarioError("equivocate needs at least two audiences")
                if d.fork_height < 1:
                    raise ScenarioError("fork_height must be at least 1")
            if isinstance(d, Withhold) and d.observers != "all":
                unknown = set(d.observers) - known
                if unknown:
                    raise ScenarioError(f"withhold: unknown observers {sorted(unknown)}")


# -- JSON ---------------------------------------------------------------------


def _directive(rec: dict) -> Any:
    rec = dict(rec)
    kind = rec.pop("type", None)
    cls = DIRECTIVES.get(kind)
    if cls is None:
        raise ScenarioError(f"unknown directive type {kind!r}")
    if "validators" in rec:
        rec["validators"] = tuple(rec["validators"])
    if "audiences" in rec:
        rec["audiences"] = tuple(tuple(a) for a in rec["audiences"])
    if isinstance(rec.get("observers"), list):
        rec["observers"] = tuple(rec["observers"])
    try:
        return cls(**rec)
    except TypeError as exc:
        raise ScenarioError(f"{kind}: {exc}") from exc


def scenario_from_dict(data: dict) -> Scenario:
    try:
        chains = tuple(
            ChainSpec(c["n"], c.get("quorum", ""), c.get("latency", 1), c.get("checks_da", True))
            for c in data["chains"]
        )
        clients = tuple(
            ClientSpec(c.get("name", f"c{i + 1}"), tuple(c.get("providers", ())), c.get("stall_rule", True))
            for i, c in enumerate(data.get("clients", []))
        )
        net = data.get("network", {})
        network = NetworkModel(net.get("mode", "partially_synchronous"), net.get("delta", 1), net.get("gst", 0), net.get("relay_delay"))
        return Scenario(
            chains=chains,
            clients=clients,
            network=network,
            topology=tuple(tuple(e) for e in data.get("topology", [])),
            adversary=tuple(_directive(d) for d in data.get("adversary", [])),
            txs=tuple(TxInput(t["round"], t["id"]) for t in data.get("txs", [])),
            horizon=data.get("horizon", 30),
            seed=data.get("seed", 0),
            cadence=data.get("cadence", 1),
        )
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc


def _directive_to_dict(d: Any) -> dict:
    name = next(k for k, v in DIRECTIVES.items() if isinstance(d, v))
    out = {"type": name}
    for k, v in d.__dict__.items():
        if isinstance(v, tuple):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        out[k] = v
    return out


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "chains": [{"n": c.n, "quorum": c.quorum, "latency": c.latency, "checks_da": c.checks_da} for c in s.chains],
        "topology": [list(e) for e in s.topology],
        "clients": [{"name": c.name, "providers": list(c.providers), "stall_rule": c.stall_rule} for c in s.clients],
        "network": {"mode": s.network.mode, "delta": s.network.delta, "gst": s.network.gst, "relay_delay": s.network.relay_delay},
        "adversary": [_directive_to_dict(d) for d in s.adversary],
        "txs": [{"round": t.round, "id": t.id} for t in s.txs],
        "horizon": s.horizon,
        "seed": s.seed,
        "cadence": s.cadence,
    }


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(data)

"""Quorum and fail-prone system algebra.

Families are antichains of validator subsets. Quorum systems are read through
their upward closure, fail-prone systems through their downward closure; no
closure is ever materialized, membership is answered by scanning members (or
arithmetically for threshold families).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Sequence

Element = Hashable
Members = frozenset  # frozenset[frozenset[Element]]

#: largest universe for which a threshold family will enumerate its members
MAX_EXPLICIT_UNIVERSE = 16


def _member_key(member: Iterable) -> tuple:
    items = sorted(member)
    return (len(items), items)


def normalize(members: Iterable[Iterable[Element]], keep: str = "minimal") -> frozenset:
    """Reduce ``members`` to an antichain.

    ``keep="minimal"`` drops every member that strictly contains another one
    (quorum systems); ``keep="maximal"`` drops every member strictly contained
    in another one (fail-prone systems).
    """
    if keep not in ("minimal", "maximal"):
        raise ValueError(f"keep must be 'minimal' or 'maximal', got {keep!r}")
    sets = {frozenset(m) for m in members}
    if keep == "minimal":
        out = {s for s in sets if not any(o < s for o in sets)}
    else:
        out = {s for s in sets if not any(s < o for o in sets)}
    return frozenset(out)


class Family:
    """Common interface of explicit and threshold set families."""

    universe: frozenset

    def members(self) -> Iterator[frozenset]:
        raise NotImplementedError

    def has_subset_of(self, s: Iterable) -> bool:
        """True iff some member is contained in ``s`` (upward closure test)."""
        raise NotImplementedError

    def has_superset_of(self, s: Iterable) -> bool:
        """True iff some member contains ``s`` (downward closure test)."""
        raise NotImplementedError

    def is_empty(self) -> bool:
        raise NotImplementedError

    def min_size(self) -> int | None:
        raise NotImplementedError

    def explicit(self) -> "SetFamily":
        return SetFamily(self.universe, frozenset(self.members()))

    def __iter__(self) -> Iterator[frozenset]:
        return self.members()

    def sorted_members(self) -> list[frozenset]:
        return sorted(self.members(), key=_member_key)

    def to_text(self) -> str:
        return format_family(self.sorted_members())


@dataclass(frozen=True)
class SetFamily(Family):
    """A family given by an explicit list of members."""

    universe: frozenset
    _members: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "universe", frozenset(self.universe))
        mem = frozenset(frozenset(m) for m in self._members)
        for m in mem:
            if not m <= self.universe:
                raise ValueError(f"member {sorted(m)} is not inside the universe")
        object.__setattr__(self, "_members", mem)

    @classmethod
    def of(cls, universe: Iterable, members: Iterable[Iterable], keep: str | None = None) -> "SetFamily":
        mem = normalize(members, keep) if keep else frozenset(frozenset(m) for m in members)
        return cls(frozenset(universe), mem)

    def members(self) -> Iterator[frozenset]:
        return iter(self._members)

    def has_subset_of(self, s: Iterable) -> bool:
        s = frozenset(s)
        return any(m <= s for m in self._members)

    def has_superset_of(self, s: Iterable) -> bool:
        s = frozenset(s)
        return any(s <= m for m in self._members)

    def is_empty(self) -> bool:
        return not self._members

    def min_size(self) -> int | None:
        return min((len(m) for m in self._members), default=None)

    def __len__(self) -> int:
        return len(self._members)

    def is_antichain(self) -> bool:
        return all(not (a < b) for a in self._members for b in self._members)


@dataclass(frozen=True)
class ThresholdFamily(Family):
    """All ``q``-subsets of ``universe``, kept in generator form."""

    universe: frozenset
    q: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "universe", frozenset(self.universe))
        if not 0 <= self.q <= len(self.universe):
            raise ValueError(f"threshold q={self.q} outside [0, {len(self.universe)}]")

    @property
    def n(self) -> int:
        return len(self.universe)

    def members(self) -> Iterator[frozenset]:
        if self.n > MAX_EXPLICIT_UNIVERSE:
            raise ValueError(f"refusing to enumerate q-subsets of a universe of {self.n}")
        return (frozenset(c) for c in itertools.combinations(sorted(self.universe), self.q))

    def has_subset_of(self, s: Iterable) -> bool:
        return len(self.universe & frozenset(s)) >= self.q

    def has_superset_of(self, s: Iterable) -> bool:
        s = frozenset(s)
        return s <= self.universe and len(s) <= self.q

    def is_empty(self) -> bool:
        return False

    def min_size(self) -> int | None:
        return self.q

    def __len__(self) -> int:
        from math import comb

        return comb(self.n, self.q)

    def to_text(self) -> str:
        return f"threshold(n={self.n},q={self.q})"


def family(universe: Iterable, members: Iterable[Iterable], keep: str | None = None) -> SetFamily:
    return SetFamily.of(universe, members, keep)


def threshold(universe: Iterable | int, q: int) -> ThresholdFamily:
    if isinstance(universe, int):
        universe = range(universe)
    return ThresholdFamily(frozenset(universe), q)


# ---------------------------------------------------------------------------
# text form


def format_family(members: Iterable[Iterable]) -> str:
    parts = []
    for m in sorted((frozenset(x) for x in members), key=_member_key):
        parts.append("{" + ",".join(str(e) for e in sorted(m)) + "}")
    return "{" + ",".join(parts) + "}"


_THRESHOLD_RE = re.compile(r"^threshold\(n=(\d+),q=(\d+)\)$")


def parse_family(text: str, universe: Iterable | None = None) -> Family:
    """Parse ``{{0,1},{0,2}}`` or ``threshold(n=4,q=3)``; elements are ints."""
    t = text.replace(" ", "")
    m = _THRESHOLD_RE.match(t)
    if m:
        return threshold(int(m.group(1)), int(m.group(2)))
    if not (t.startswith("{") and t.endswith("}")):
        raise ValueError(f"cannot parse family {text!r}")
    body = t[1:-1]
    members = [
        frozenset(int(x) for x in grp.split(",") if x != "")
        for grp in re.findall(r"\{([^{}]*)\}", body)
    ]
    if re.sub(r"\{[^{}]*\}", "", body).strip(","):
        raise ValueError(f"cannot parse family {text!r}")
    if universe is None:
        universe = frozenset().union(*members) if members else frozenset()
    return SetFamily(frozenset(universe), frozenset(members))


# ---------------------------------------------------------------------------
# closure comparisons


def in_closure_upward(s: Iterable, fam: Family) -> bool:
    return fam.has_subset_of(s)


def in_closure_downward(s: Iterable, fam: Family) -> bool:
    return fam.has_superset_of(s)


def up_closure_contains(big: Family, small: Family) -> bool:
    """closure(big) ⊇ closure(small) for quorum-style (upward) closures."""
    if isinstance(big, ThresholdFamily) and isinstance(small, ThresholdFamily) and big.universe == small.universe:
        return big.q <= small.q
    return all(big.has_subset_of(m) for m in small.members())


def down_closure_contains(big: Family, small: Family) -> bool:
    """closure(big) ⊇ closure(small) for fail-prone (downward) closures."""
    if isinstance(big, ThresholdFamily) and isinstance(small, ThresholdFamily) and big.universe == small.universe:
        return big.q >= small.q
    return all(big.has_superset_of(m) for m in small.members())


@dataclass(frozen=True)
class SystemsTuple:
    """(quorum system, safety fail-prone system, slashable fail-prone system).

    ``Ba`` may be ``None``, standing for a vacuous slashable-safety guarantee.
    """

    Q: Family
    Bs: Family
    Ba: Family | None

    @property
    def universe(self) -> frozenset:
        return self.Q.universe


def _compare(big_contains, a: Family, b: Family) -> tuple[bool, bool]:
    """Return (closure(a) ⊇ closure(b), strict)."""
    ge = big_contains(a, b)
    if not ge:
        return False, False
    return True, not big_contains(b, a)


def dominates(t1: SystemsTuple, t2: SystemsTuple) -> bool:
    """True iff ``t1`` dominates ``t2``.

    A ``None`` slashable system on either side drops that coordinate from the
    comparison.
    """
    fams = [t1.Q, t1.Bs, t2.Q, t2.Bs] + [f for f in (t1.Ba, t2.Ba) if f is not None]
    if len({f.universe for f in fams}) > 1:
        raise ValueError("dominates requires tuples over the same universe")
    checks = [_compare(up_closure_contains, t1.Q, t2.Q), _compare(down_closure_contains, t1.Bs, t2.Bs)]
    if t1.Ba is not None and t2.Ba is not None:
        checks.append(_compare(down_closure_contains, t1.Ba, t2.Ba))
    return all(ge for ge, _ in checks) and any(strict for _, strict in checks)


# ---------------------------------------------------------------------------
# constructors


def threshold_systems(universe: Iterable | int, q: int) -> SystemsTuple:
    """Quorums of size ``q``; safety and slashable systems implied by intersection.

    Two quorums overlap in at least ``2q - n`` validators, so safety tolerates
    ``2q - n - 1`` faults and a violation exposes ``2q - n`` of them.
    """
    Q = threshold(universe, q)
    overlap = 2 * q - Q.n
    if overlap < 1:
        raise ValueError(f"quorums of size {q} over {Q.n} validators need not intersect")
    return SystemsTuple(Q, threshold(Q.universe, overlap - 1), threshold(Q.universe, overlap))


def tendermint_systems(f: int, universe: Sequence | None = None) -> SystemsTuple:
    """n = 3f+1 validators with quorum 2f+1: f-safe, f-live, (f+1)-slashable."""
    if f < 0:
        raise ValueError("f must be non-negative")
    n = 3 * f + 1
    if universe is None:
        universe = range(n)
    if len(universe) != n:
        raise ValueError(f"tendermint with f={f} needs {n} validators, got {len(universe)}")
    return threshold_systems(universe, 2 * f + 1)


# ---------------------------------------------------------------------------
# multi-chain maps


@dataclass(frozen=True)
class ChainSystems:
    """Per-chain universes and systems; universes must be pairwise disjoint."""

    chains: tuple  # tuple[SystemsTuple, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "chains", tuple(self.chains))
        seen: set = set()
        for t in self.chains:
            if seen & t.universe:
                raise ValueError("chain universes must be pairwise disjoint")
            seen |= t.universe

    def __len__(self) -> int:
        return len(self.chains)

    def __getitem__(self, i: int) -> SystemsTuple:
        return self.chains[i]

    @property
    def universe(self) -> frozenset:
        return frozenset().union(*(t.universe for t in self.chains))

    def universe_of(self, i: int) -> frozenset:
        return self.chains[i].universe


def f_Q(honest: Iterable, chains: ChainSystems) -> frozenset:
    """Indices of chains that stay live when exactly ``honest`` are honest."""
    s = frozenset(honest)
    return frozenset(i for i, t in enumerate(chains.chains) if t.Q.has_subset_of(s & t.universe))


def f_s(adversarial: Iterable, chains: ChainSystems) -> frozenset:
    """Indices of chains that are not safe against ``adversarial``."""
    f = frozenset(adversarial)
    return frozenset(i for i, t in enumerate(chains.chains) if not t.Bs.has_superset_of(f & t.universe))


def f_a(adversarial: Iterable, chains: ChainSystems) -> frozenset:
    """Indices of chains on which identifying ``adversarial`` exposes a slashable set."""
    f = frozenset(adversarial)
    return frozenset(
        i
        for i, t in enumerate(chains.chains)
        if t.Ba is not None and t.Ba.has_subset_of(f & t.universe)
    )


def chain_live(chain: SystemsTuple, corrupted: Iterable) -> bool:
    """Some quorum of ``chain`` is untouched by ``corrupted``."""
    return chain.Q.has_subset_of(chain.universe - frozenset(corrupted))


# ---------------------------------------------------------------------------
# trade-off checkers


def _images(fam: Family | None, fn, chains: ChainSystems) -> set:
    if fam is None:
        return set()
    return {fn(m, chains) for m in fam.members()}


def check_interchain_safety_tradeoff(QI: Family, BsI: Family, chains: ChainSystems) -> bool:
    live = _images(QI, f_Q, chains)
    unsafe = _images(BsI, f_s, chains)
    return not any((a & b) <= u for a in live for b in live for u in unsafe)


def check_interchain_slashable_tradeoff(QI: Family, BaI: Family | None, chains: ChainSystems) -> bool:
    if BaI is None:
        return True
    live = _images(QI, f_Q, chains)
    exposed = _images(BaI, f_a, chains)
    if any((a & b) < e for a in live for b in live for e in exposed):
        return False
    for ba in BaI.members():
        for t in chains.chains:
            part = ba & t.universe
            if t.Ba is not None and any(m < part for m in t.Ba.members()):
                return False
    return True


def check_interchain_da_condition(QI: Family, da_chains: Iterable[int], chains: ChainSystems) -> bool:
    da = frozenset(da_chains)
    return all(f_Q(q, chains) & da for q in QI.members())


def _intersections(Q: Family) -> set:
    qs = list(Q.members())
    return {a & b for a, b in itertools.combinations_with_replacement(qs, 2)}


def check_smr_psync(Q: Family, Bs: Family) -> bool:
    return not any(Bs.has_superset_of(x) for x in _intersections(Q))


def check_smr_slashable(Q: Family, Ba: Family | None) -> bool:
    if Ba is None:
        return True
    bas = list(Ba.members())
    return not any(x < b for x in _intersections(Q) for b in bas)


def check_smr_da(Q: Family, da_validators: Iterable) -> bool:
    u = frozenset(da_validators)
    return all(q & u for q in Q.members())


def check_smr_sync(Q: Family, Bs: Family) -> bool:
    return not any(Bs.has_superset_of(q) for q in Q.members())


# ---------------------------------------------------------------------------
# scalar projection


def scalar_resilience(t: SystemsTuple) -> tuple[int, int, int | None]:
    """Project a tuple onto (f_live, f_safe, f_slash).

    ``f_live``/``f_safe`` are -1 when even the empty adversary breaks the
    property; ``f_slash`` is None when the slashable system is vacuous.
    """
    universe = sorted(t.universe)

    def largest(ok) -> int:
        best = -1
        for size in range(len(universe) + 1):
            if all(ok(frozenset(c)) for c in itertools.combinations(universe, size)):
                best = size
            else:
                break
        return best

    f_live = largest(lambda F: t.Q.has_subset_of(t.universe - F))
    f_safe = largest(lambda F: t.Bs.has_superset_of(F))
    f_slash = None if t.Ba is None else t.Ba.min_size()
    return f_live, f_safe, f_slash

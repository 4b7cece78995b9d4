"""Upper-boundary property points over chain indices, and their lifting to validator systems.

Subsets of the chain index set are int bitmasks; families are frozensets of
masks; closures are bitsets over all 2^m masks. A property tuple is
(DQ, Ds, Da) where DQ lists chain sets whose joint liveness suffices, Ds the
sets of chains that may be unsafe without breaking safety, and Da the chain
sets on which culprits are exposed after a violation (None when no violation
can occur).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .quorum import ChainSystems, SetFamily, SystemsTuple, normalize

MAX_CHAINS = 4
BOT = "⊥"

Mask = int


def to_mask(s: Iterable[int]) -> Mask:
    m = 0
    for i in s:
        m |= 1 << i
    return m


def to_set(m: Mask) -> frozenset:
    return frozenset(i for i in range(m.bit_length()) if m >> i & 1)


def _fam(sets: Iterable[Iterable[int]]) -> frozenset:
    return frozenset(to_mask(s) for s in sets)


# -- closures as bitsets over the power set ------------------------------------


@lru_cache(maxsize=None)
def _up_table(m: int) -> tuple:
    full = (1 << m) - 1
    return tuple(sum(1 << s for s in range(1 << m) if s & x == x) for x in range(full + 1))


@lru_cache(maxsize=None)
def _down_table(m: int) -> tuple:
    full = (1 << m) - 1
    return tuple(sum(1 << s for s in range(1 << m) if s & x == s) for x in range(full + 1))


def up_closure(fam: frozenset, m: int) -> int:
    t = _up_table(m)
    out = 0
    for x in fam:
        out |= t[x]
    return out


def down_closure(fam: frozenset, m: int) -> int:
    t = _down_table(m)
    out = 0
    for x in fam:
        out |= t[x]
    return out


# -- property tuples ----------------------------------------------------------------


def _member_key(x: Mask) -> tuple:
    s = sorted(to_set(x))
    return (len(s), s)


def _family_key(fam: frozenset | None) -> tuple:
    if fam is None:
        return (1, [])
    return (0, sorted(_member_key(x) for x in fam))


def format_property_family(fam: frozenset | None) -> str:
    if fam is None:
        return BOT
    if not fam:
        return "∅"
    parts = ["{" + ",".join(str(i) for i in s) + "}" for _, s in sorted(_member_key(x) for x in fam)]
    return "{" + ",".join(parts) + "}"


def parse_property_family(text: str) -> frozenset | None:
    t = text.replace(" ", "")
    if t in (BOT, "bot"):
        return None
    if t in ("∅", "{}"):
        return frozenset()
    if not (t.startswith("{{") and t.endswith("}}")):
        raise ValueError(f"cannot parse property family {text!r}")
    groups = t[2:-2].split("},{")
    return frozenset(to_mask(int(x) for x in g.split(",") if x) for g in groups)


@dataclass(frozen=True)
class PropertyTuple:
    DQ: frozenset
    Ds: frozenset
    Da: frozenset | None
    chains: int  # size of the chain index set

    @classmethod
    def of(cls, DQ, Ds, Da, chains: int) -> "PropertyTuple":
        return cls(_fam(DQ), _fam(Ds), None if Da is None else _fam(Da), chains)

    def families(self) -> tuple:
        return tuple(
            None if f is None else frozenset(to_set(x) for x in f) for f in (self.DQ, self.Ds, self.Da)
        )

    def sort_key(self) -> tuple:
        return (_family_key(self.DQ), _family_key(self.Ds), _family_key(self.Da))

    def to_text(self) -> str:
        return "(" + ", ".join(format_property_family(f) for f in (self.DQ, self.Ds, self.Da)) + ")"

    def is_antichain(self) -> bool:
        return all(f is None or _antichain(f) for f in (self.DQ, self.Ds, self.Da))


def parse_property_tuple(text: str, chains: int) -> PropertyTuple:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"cannot parse property tuple {text!r}")
    parts, depth, cur = [], 0, ""
    for ch in body[1:-1]:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "{"
        depth -= ch == "}"
        cur += ch
    parts.append(cur)
    if len(parts) != 3:
        raise ValueError(f"property tuple needs three families: {text!r}")
    DQ, Ds, Da = (parse_property_family(p) for p in parts)
    if DQ is None or Ds is None:
        raise ValueError("only Da may be ⊥")
    return PropertyTuple(DQ, Ds, Da, chains)


def _antichain(fam: frozenset) -> bool:
    return not any(a != b and a & b == a for a in fam for b in fam)


def antichains(m: int) -> list[frozenset]:
    """Every antichain of subsets of an ``m``-element index set (the empty family included)."""
    subsets = sorted(range(1 << m), key=_member_key)
    out: list[frozenset] = []

    def grow(start: int, chosen: list) -> None:
        out.append(frozenset(chosen))
        for j in range(start, len(subsets)):
            x = subsets[j]
            if all(x & y != x and x & y != y for y in chosen):
                chosen.append(x)
                grow(j + 1, chosen)
                chosen.pop()

    grow(0, [])
    return out


def derived_da(Ds: frozenset, m: int) -> frozenset | None:
    """Minimal chain sets outside the downward closure of ``Ds``; None if there are none.

    A violation needs the unsafe chains to escape every Ds member, so the
    minimal such sets are exactly the chains guaranteed to be violated.
    """
    closed = down_closure(Ds, m)
    outside = [x for x in range(1 << m) if not closed >> x & 1]
    if not outside:
        return None
    return frozenset(x for x in outside if not any(y != x and y & x == y for y in outside))


# -- conditions ---------------------------------------------------------------------


def cond_a(t: PropertyTuple) -> bool:
    return not any((a & b) & d == (a & b) for a in t.DQ for b in t.DQ for d in t.Ds)


def cond_b(t: PropertyTuple) -> bool:
    if t.Da is None:
        return True
    return not any((a & b) & d == (a & b) and (a & b) != d for a in t.DQ for b in t.DQ for d in t.Da)


def cond_c(t: PropertyTuple, da_chains: Iterable[int]) -> bool:
    da = to_mask(da_chains)
    return all(q & da for q in t.DQ)


def _closures(t: PropertyTuple) -> tuple:
    m = t.chains
    return (up_closure(t.DQ, m), down_closure(t.Ds, m), None if t.Da is None else up_closure(t.Da, m))


def _dom(a: tuple, b: tuple) -> bool:
    # Da is a disjunction ("culprits on every chain of some member"), so a
    # smaller upward closure is the stronger guarantee.
    pairs = [(a[0], b[0]), (a[1], b[1])]
    if a[2] is not None and b[2] is not None:
        pairs.append((b[2], a[2]))
    return all(x & y == y for x, y in pairs) and any(x != y for x, y in pairs)


def property_dominates(t1: PropertyTuple, t2: PropertyTuple) -> bool:
    """True iff ``t1`` is at least as strong as ``t2`` everywhere and stronger somewhere.

    Liveness compares upward closures of DQ, safety downward closures of Ds,
    and slashability compares Da by inclusion of upward closures, reversed.
    A ⊥ slashable system drops that coordinate.
    """
    return _dom(_closures(t1), _closures(t2))


def enumerate_upper_boundary(k: int, da_chains: Iterable[int] | None = None) -> list[PropertyTuple]:
    """Non-dominated property tuples over ``k`` chains satisfying conditions (a)-(c).

    ``Ds`` ranges over non-empty antichains (the family {∅} means "safe only if
    every chain is safe"), and ``Da`` is derived from ``Ds``.
    """
    if not 1 <= k <= MAX_CHAINS:
        raise ValueError(f"chain count must lie in 1..{MAX_CHAINS}, got {k}")
    da = tuple(range(k)) if da_chains is None else tuple(da_chains)
    if any(not 0 <= i < k for i in da):
        raise ValueError(f"data-availability chains {sorted(da)} outside 0..{k - 1}")
    fams = antichains(k)
    ds_options = [(Ds, derived_da(Ds, k)) for Ds in fams if Ds]
    candidates = []
    for DQ in fams:
        probe = PropertyTuple(DQ, frozenset(), None, k)
        if not cond_c(probe, da):
            continue
        for Ds, Da in ds_options:
            t = PropertyTuple(DQ, Ds, Da, k)
            if cond_a(t) and cond_b(t):
                candidates.append(t)
    survivors = _non_dominated(candidates)
    return sorted(survivors, key=PropertyTuple.sort_key)


def _non_dominated(cands: list[PropertyTuple]) -> list[PropertyTuple]:
    closed = [_closures(t) for t in cands]
    return [t for t, c in zip(cands, closed) if not any(_dom(o, c) for o in closed if o is not c)]


# -- the timestamping point and markers ------------------------------------------------


def timestamping_tuple(k: int) -> PropertyTuple:
    """Timestamping over chains 0..k: live iff all live, safe iff one is safe."""
    if k < 1:
        raise ValueError("timestamping needs at least two chains")
    return timestamping_over(range(k + 1), k + 1)


def timestamping_over(subset: Iterable[int], m: int) -> PropertyTuple:
    """Timestamping restricted to ``subset``; other chains are ignored."""
    S = to_mask(subset)
    full = (1 << m) - 1
    Ds = frozenset(full & ~(1 << i) for i in to_set(S))
    return PropertyTuple(frozenset({S}), Ds, frozenset({S}), m)


def marker(t: PropertyTuple) -> str:
    if not t.DQ or (len(t.DQ) == 1 and bin(next(iter(t.DQ))).count("1") == 1):
        return "trivial"
    for n in range(2, t.chains + 1):
        for sub in itertools.combinations(range(t.chains), n):
            if timestamping_over(sub, t.chains) == t:
                return "timestamping"
    return "other"


def check_best_accountability(k: int, da_chains: Iterable[int] | None = None) -> bool:
    """Every enumerated Da closure lies inside the timestamping Da closure."""
    if k < 2:
        return True
    ts = timestamping_tuple(k - 1)
    ref = down_closure(ts.Da, k)
    for t in enumerate_upper_boundary(k, da_chains):
        if t.Da is not None and down_closure(t.Da, k) & ref != down_closure(t.Da, k):
            return False
    return True


# -- lifting to validator systems ---------------------------------------------------------


def lift_to_systems(t: PropertyTuple, chains: ChainSystems) -> SystemsTuple:
    """Canonical validator-level systems realizing property tuple ``t``."""
    if len(chains) != t.chains:
        raise ValueError(f"tuple covers {t.chains} chains, got {len(chains)}")
    universe = chains.universe
    per_q = [list(c.Q.members()) for c in chains.chains]
    per_bs = [list(c.Bs.members()) for c in chains.chains]

    qi = []
    for D in t.DQ:
        idx = sorted(to_set(D))
        for combo in itertools.product(*(per_q[i] for i in idx)):
            qi.append(frozenset().union(*combo))
    bs = []
    for D in t.Ds:
        opts = [[chains.universe_of(i)] if D >> i & 1 else per_bs[i] for i in range(t.chains)]
        for combo in itertools.product(*opts):
            bs.append(frozenset().union(*combo))
    ba = None
    if t.Da is not None:
        raw = []
        for D in t.Da:
            opts = []
            for i in sorted(to_set(D)):
                src = chains[i].Ba
                if src is None:
                    break
                opts.append(list(src.members()))
            else:
                for combo in itertools.product(*opts):
                    raw.append(frozenset().union(*combo))
        ba = SetFamily(universe, normalize(raw, "maximal"))
    return SystemsTuple(
        SetFamily(universe, normalize(qi, "minimal")),
        SetFamily(universe, normalize(bs, "maximal")),
        ba,
    )


def scalar_mesh_resilience(fs: Sequence[int]) -> tuple[int, int]:
    """(liveness, slashable) resilience of timestamping over chains with resiliences ``fs``.

    Chain 0 is the data-availability chain and must be the least resilient.
    Each of the len(fs) chains exposes f_i + 1 validators on a violation.
    """
    if not fs:
        raise ValueError("need at least one chain")
    if any(f < fs[0] for f in fs[1:]):
        raise ValueError(f"chain 0 must have the smallest resilience, got {list(fs)}")
    return fs[0], len(fs) + sum(fs)

"""Enumeration of nonfanout inflations and of isomorphic sub-network pairs.

Raw wirings are enumerated with the first attached party of every source
wired identically (this fixes the labelling of source copies), so there are
``prod_i (K!)**(m_i - 1)`` of them, ``m_i`` being the number of parties fed
by source ``i``.  Two raw wirings describe the same inflation when they
differ by a relabelling of party copies ("copy classes"); symmetric
classes further identify copy classes related by a symmetry of the base
network (e.g. any permutation of the parties of the tetrahedron).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, permutations, product
from math import factorial, prod
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple

from .network import (Inflation, IsoMap, PartyRef, Scenario, SubNetwork,
                      ordered_signature, subnetwork_isomorphism, validate_inflation)

log = logging.getLogger(__name__)

DEFAULT_MAX_RAW_WIRINGS = 10**6

Wiring = Tuple[Tuple[Tuple[int, ...], ...], ...]


class TooLargeError(RuntimeError):
    """A configured resource cap was exceeded."""


@dataclass(frozen=True)
class InflationClass:
    """One isomorphism class of inflations.

    ``members`` are the copy classes (inflations up to copy relabelling)
    merged by base-network symmetries; ``multiplicity`` counts them.
    ``raw_count`` is the number of raw wirings in the class.
    """

    representative: Inflation
    members: Tuple[Inflation, ...]
    raw_count: int

    @property
    def multiplicity(self) -> int:
        return len(self.members)


def raw_wiring_count(scenario: Scenario, order: int) -> int:
    return prod(factorial(order) ** (len(att) - 1) for att in scenario.attachment)


def _raw_wirings(scenario: Scenario, order: int) -> Iterator[Wiring]:
    perms = list(permutations(range(order)))
    per_source = []
    for att in scenario.attachment:
        options = []
        for cols in product(perms, repeat=len(att) - 1):
            options.append(tuple((s,) + tuple(c[s] for c in cols) for s in range(order)))
        per_source.append(options)
    return product(*per_source)


def _normalise(rows) -> Tuple[Tuple[int, ...], ...]:
    return tuple(sorted(rows))


def _relabel(scenario: Scenario, wiring: Wiring, g) -> Wiring:
    """Apply party-copy relabelling ``g[j]`` (a tuple permutation per party type)."""
    out = []
    for att, rows in zip(scenario.attachment, wiring):
        out.append(_normalise(tuple(g[j][r[c]] for c, j in enumerate(att)) for r in rows))
    return tuple(out)


def _apply_symmetry(scenario: Scenario, wiring: Wiring, party_perm, source_perm) -> Wiring:
    """Image of a wiring under a base-network automorphism."""
    new: List = [None] * len(scenario.sources)
    for i, att in enumerate(scenario.attachment):
        target = source_perm[i]
        new_att = scenario.attachment[target]
        col_of = {party_perm[j]: c for c, j in enumerate(att)}
        rows = [tuple(r[col_of[jj]] for jj in new_att) for r in wiring[i]]
        new[target] = rows
    return tuple(_normalise(rows) for rows in new)


def _copy_group(scenario: Scenario, order: int):
    perms = list(permutations(range(order)))
    return list(product(perms, repeat=scenario.n_parties))


def _canonical(scenario: Scenario, wiring: Wiring, group) -> Wiring:
    return min(_relabel(scenario, wiring, g) for g in group)


def enumerate_inflations(scenario: Scenario, order: int, *, symmetric: bool = True,
                         max_raw_wirings: int = DEFAULT_MAX_RAW_WIRINGS) -> List[InflationClass]:
    """All nonfanout inflations of the given order, one entry per class.

    With ``symmetric=False`` classes are copy classes only (each with a
    single member), which is what the linear program needs whenever the
    observed behavior is not itself symmetric.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    total = raw_wiring_count(scenario, order)
    if total > max_raw_wirings:
        raise TooLargeError(f"{total} raw wirings exceed the cap of {max_raw_wirings}")
    group = _copy_group(scenario, order)
    orbit_size: Dict[Wiring, int] = {}
    seen = set()
    for w in _raw_wirings(scenario, order):
        w = tuple(_normalise(rows) for rows in w)
        if w in seen:
            continue
        orbit = {_relabel(scenario, w, g) for g in group}
        seen |= orbit
        orbit_size[min(orbit)] = len(orbit)
    copy_classes = sorted(orbit_size)
    if sum(orbit_size.values()) != total:
        raise AssertionError("raw wiring orbits do not partition the wiring set")

    if not symmetric:
        return [InflationClass(Inflation(scenario, order, w), (Inflation(scenario, order, w),),
                               orbit_size[w]) for w in copy_classes]

    autos = scenario.automorphisms
    assigned: Dict[Wiring, Wiring] = {}
    groups: Dict[Wiring, List[Wiring]] = {}
    for w in copy_classes:
        if w in assigned:
            continue
        images = sorted({_canonical(scenario, _apply_symmetry(scenario, w, pp, sp), group)
                         for pp, sp in autos})
        rep = images[0]
        for im in images:
            assigned[im] = rep
        groups[rep] = images
    out = []
    for rep in sorted(groups):
        members = tuple(Inflation(scenario, order, w) for w in groups[rep])
        out.append(InflationClass(members[0], members, sum(orbit_size[w] for w in groups[rep])))
    for c in out:
        assert all(validate_inflation(m) for m in c.members)
    return out


def lp_inflations(scenario: Scenario, order: int, *,
                  max_raw_wirings: int = DEFAULT_MAX_RAW_WIRINGS) -> List[Inflation]:
    """Copy-class representatives, in deterministic order, for the LP."""
    return [c.representative for c in
            enumerate_inflations(scenario, order, symmetric=False, max_raw_wirings=max_raw_wirings)]


# ---------------------------------------------------------------------------
# sub-network catalogue


def _type_sorted_orderings(subset: Sequence[PartyRef]) -> Iterator[Tuple[PartyRef, ...]]:
    by_type: Dict[int, List[PartyRef]] = {}
    for p in sorted(subset):
        by_type.setdefault(p[0], []).append(p)
    blocks = [list(permutations(by_type[t])) for t in sorted(by_type)]
    for choice in product(*blocks):
        yield tuple(p for blk in choice for p in blk)


def canonical_orderings(host: Inflation, subset) -> Tuple[tuple, Tuple[Tuple[PartyRef, ...], ...]]:
    """Minimal signature of ``subset`` and every ordering attaining it.

    More than one ordering means the sub-network has a nontrivial
    automorphism (e.g. the global copy swap of a double triangle).
    """
    best = None
    hits: List[Tuple[PartyRef, ...]] = []
    for o in _type_sorted_orderings(subset):
        sig = ordered_signature(host, o)
        if best is None or sig < best:
            best, hits = sig, [o]
        elif sig == best:
            hits.append(o)
    return best, tuple(hits)


def all_subsets(parties: Sequence[PartyRef]) -> Iterator[FrozenSet[PartyRef]]:
    for r in range(len(parties), 0, -1):
        for c in combinations(parties, r):
            yield frozenset(c)


def _bijections_by_signature(host: Inflation, max_one_per_type: bool = False):
    table: Dict[tuple, List[Tuple[PartyRef, ...]]] = {}
    for sub in all_subsets(host.party_copies):
        if max_one_per_type and len({p[0] for p in sub}) != len(sub):
            continue
        for o in _type_sorted_orderings(sub):
            table.setdefault(ordered_signature(host, o), []).append(o)
    return table


def _maximal(pairs: List[Tuple[Tuple[PartyRef, ...], Tuple[PartyRef, ...]]]):
    """Drop pairs whose bijection is a restriction of a larger returned pair."""
    pairs = sorted(pairs, key=lambda pr: (-len(pr[0]), pr))
    covered = set()
    kept = []
    for o1, o2 in pairs:
        bij = frozenset(zip(o1, o2))
        if bij in covered:
            continue
        kept.append((o1, o2))
        items = sorted(bij)
        for r in range(1, len(items) + 1):
            for c in combinations(items, r):
                covered.add(frozenset(c))
    return kept


def enumerate_c1_pairs(inflation: Inflation, scenario: Scenario) -> List[Tuple[SubNetwork, SubNetwork, IsoMap]]:
    """Maximal sub-networks of the inflation isomorphic to one of the base network."""
    base = Inflation.trivial(scenario)
    base_sigs = _bijections_by_signature(base)
    raw = []
    for sig, orders in _bijections_by_signature(inflation, max_one_per_type=True).items():
        if sig in base_sigs:
            target = base_sigs[sig][0]
            raw.extend((o, target) for o in orders)
    out = []
    for o1, o2 in _maximal(raw):
        g1, g2 = SubNetwork(inflation, o1), SubNetwork(base, o2)
        out.append((g1, g2, subnetwork_isomorphism(g1, g2)))
    return out


def enumerate_c2_pairs(i1: Inflation, i2: Inflation) -> List[Tuple[SubNetwork, SubNetwork, IsoMap]]:
    """Maximal isomorphic sub-network pairs across two inflations (may be equal)."""
    if i1.base != i2.base:
        raise ValueError("inflations over different scenarios")
    t1 = _bijections_by_signature(i1)
    t2 = t1 if i2 == i1 else _bijections_by_signature(i2)
    raw = []
    for sig, orders in t1.items():
        for o2 in t2.get(sig, ()):
            raw.extend((o1, o2) for o1 in orders)
    out = []
    for o1, o2 in _maximal(raw):
        g1, g2 = SubNetwork(i1, o1), SubNetwork(i2, o2)
        out.append((g1, g2, subnetwork_isomorphism(g1, g2)))
    return out

"""Network scenarios, nonfanout inflations and sub-network isomorphisms.

Copy indices are 0-based internally and printed 1-based.  A party copy is a
pair ``(party_type, copy)`` and a source copy is ``(source_type, copy)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

log = logging.getLogger(__name__)

PartyRef = Tuple[int, int]
SourceRef = Tuple[int, int]


class InvalidScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class PartySpec:
    name: str
    n_inputs: int = 2
    n_outputs: int = 2

    def __post_init__(self):
        if self.n_inputs < 1:
            raise InvalidScenarioError(f"party {self.name}: n_inputs must be >= 1")
        if self.n_outputs < 1:
            raise InvalidScenarioError(f"party {self.name}: n_outputs must be >= 1")


@dataclass(frozen=True)
class Scenario:
    """Parties, sources and the party/source attachment relation.

    ``attachment[i]`` is the sorted tuple of party indices fed by source ``i``.
    """

    parties: Tuple[PartySpec, ...]
    sources: Tuple[str, ...]
    attachment: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        names = [p.name for p in self.parties]
        if len(set(names)) != len(names):
            raise InvalidScenarioError(f"duplicate party names in {names}")
        if len(self.attachment) != len(self.sources):
            raise InvalidScenarioError("one attachment entry per source is required")
        for i, att in enumerate(self.attachment):
            if tuple(sorted(set(att))) != tuple(att):
                raise InvalidScenarioError(f"source {self.sources[i]}: attachment must be sorted and unique")
            if any(j < 0 or j >= len(self.parties) for j in att):
                raise InvalidScenarioError(f"source {self.sources[i]}: unknown party index")

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def degenerate(self) -> bool:
        """True for N=2, where no genuine multipartite claim is made."""
        return self.n_parties < 3

    @cached_property
    def party_sources(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(
            tuple(i for i, att in enumerate(self.attachment) if j in att)
            for j in range(self.n_parties)
        )

    def party_index(self, name: str) -> int:
        for j, p in enumerate(self.parties):
            if p.name == name:
                return j
        raise KeyError(name)

    @cached_property
    def automorphisms(self) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]:
        """All (party permutation, source permutation) pairs preserving attachment.

        Party specs are ignored: this is the structural symmetry of the graph.
        """
        att_index: Dict[FrozenSet[int], List[int]] = {}
        for i, att in enumerate(self.attachment):
            att_index.setdefault(frozenset(att), []).append(i)
        out = []
        for perm in permutations(range(self.n_parties)):
            src = [None] * len(self.sources)
            used = set()
            ok = True
            for i, att in enumerate(self.attachment):
                image = frozenset(perm[j] for j in att)
                cands = [c for c in att_index.get(image, ()) if c not in used]
                if not cands:
                    ok = False
                    break
                src[i] = cands[0]
                used.add(cands[0])
            if ok:
                out.append((tuple(perm), tuple(src)))
        return tuple(out)


def canonical_scenario(n: int, party_specs: Optional[Sequence[PartySpec]] = None) -> Scenario:
    """The N-party network with one source per (N-1)-subset of parties.

    Source ``S_i`` feeds every party except ``A_i``.
    """
    if n < 2:
        raise InvalidScenarioError(f"canonical scenario needs n >= 2, got {n}")
    if party_specs is None:
        party_specs = [PartySpec(f"A{j + 1}") for j in range(n)]
    party_specs = tuple(party_specs)
    if len(party_specs) != n:
        raise InvalidScenarioError(f"expected {n} party specs, got {len(party_specs)}")
    if n == 2:
        log.warning("N=2 scenario: sources are one-party; no genuine multipartite claim applies")
    sources = tuple(f"S_{p.name}" for p in party_specs)
    attachment = tuple(tuple(j for j in range(n) if j != i) for i in range(n))
    return Scenario(party_specs, sources, attachment)


@dataclass(frozen=True)
class Inflation:
    """K-th order copy structure over a base scenario.

    ``wiring[i][s]`` lists, for copy ``s`` of source ``i``, the copy index of
    each party in ``base.attachment[i]`` (same column order).
    """

    base: Scenario
    order: int
    wiring: Tuple[Tuple[Tuple[int, ...], ...], ...]

    @staticmethod
    def trivial(base: Scenario) -> "Inflation":
        return Inflation(base, 1, tuple(((0,) * len(att),) for att in base.attachment))

    @staticmethod
    def identity(base: Scenario, order: int) -> "Inflation":
        """K disjoint copies of the base network."""
        return Inflation(
            base, order,
            tuple(tuple((s,) * len(att) for s in range(order)) for att in base.attachment),
        )

    @cached_property
    def party_copies(self) -> Tuple[PartyRef, ...]:
        return tuple((j, k) for j in range(self.base.n_parties) for k in range(self.order))

    @cached_property
    def links(self) -> Dict[PartyRef, Tuple[SourceRef, ...]]:
        """Source copies attached to each party copy (valid inflations only)."""
        out: Dict[PartyRef, List[SourceRef]] = {pc: [] for pc in self.party_copies}
        for i, att in enumerate(self.base.attachment):
            for s, row in enumerate(self.wiring[i]):
                for col, j in enumerate(att):
                    out[(j, row[col])].append((i, s))
        return {pc: tuple(sorted(v)) for pc, v in out.items()}

    def describe(self) -> str:
        lines = []
        for i, att in enumerate(self.base.attachment):
            names = [self.base.parties[j].name for j in att]
            rows = ["(" + ",".join(f"{n}^{c + 1}" for n, c in zip(names, row)) + ")"
                    for row in self.wiring[i]]
            lines.append(f"  {self.base.sources[i]}: " + " ".join(rows))
        return "\n".join(lines)


def validate_inflation(candidate: Inflation) -> bool:
    """Check both nonfanout rules; never raises."""
    base, K = candidate.base, candidate.order
    if K < 1 or len(candidate.wiring) != len(base.attachment):
        return False
    for i, att in enumerate(base.attachment):
        rows = candidate.wiring[i]
        if len(rows) != K:
            return False
        if any(len(row) != len(att) for row in rows):
            return False
        for col in range(len(att)):
            if sorted(row[col] for row in rows) != list(range(K)):
                return False
    return True


@dataclass(frozen=True)
class SubNetwork:
    """Ordered party copies of a host plus every source copy they touch."""

    host: Inflation
    parties: Tuple[PartyRef, ...]

    def __post_init__(self):
        if isinstance(self.host, Scenario):
            object.__setattr__(self, "host", Inflation.trivial(self.host))
        parties = tuple(tuple(p) for p in self.parties)
        object.__setattr__(self, "parties", parties)
        if len(set(parties)) != len(parties):
            raise ValueError(f"duplicate parties in sub-network {parties}")
        links = self.host.links
        for p in parties:
            if p not in links:
                raise ValueError(f"party copy {p} not in host")

    @property
    def sources(self) -> FrozenSet[SourceRef]:
        links = self.host.links
        return frozenset(s for p in self.parties for s in links[p])

    @property
    def types(self) -> Tuple[int, ...]:
        return tuple(j for j, _ in self.parties)

    def signature(self) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, Tuple[int, ...]], ...]]:
        return ordered_signature(self.host, self.parties)

    def label(self) -> str:
        names = self.host.base.parties
        if self.host.order == 1:
            return "(" + ",".join(names[j].name for j, _ in self.parties) + ")"
        return "(" + ",".join(f"{names[j].name}^{k + 1}" for j, k in self.parties) + ")"


def ordered_signature(host: Inflation, parties: Sequence[PartyRef]):
    """Isomorphism invariant of an ordered party list.

    Each touched source copy is summarised by its type and the positions of
    the listed parties it feeds; two ordered lists are isomorphic exactly
    when types agree position-wise and these summaries agree as sets.
    """
    links = host.links
    touched: Dict[SourceRef, List[int]] = {}
    for pos, p in enumerate(parties):
        for s in links[p]:
            touched.setdefault(s, []).append(pos)
    sig = tuple(sorted((s[0], tuple(pos)) for s, pos in touched.items()))
    return tuple(j for j, _ in parties), sig


@dataclass(frozen=True)
class IsoMap:
    source: SubNetwork
    target: SubNetwork
    party_bijection: Tuple[Tuple[PartyRef, PartyRef], ...]
    source_bijection: Tuple[Tuple[SourceRef, SourceRef], ...]


def _source_by_positions(host: Inflation, parties) -> Dict[Tuple[int, Tuple[int, ...]], SourceRef]:
    links = host.links
    touched: Dict[SourceRef, List[int]] = {}
    for pos, p in enumerate(parties):
        for s in links[p]:
            touched.setdefault(s, []).append(pos)
    return {(s[0], tuple(pos)): s for s, pos in touched.items()}


def subnetwork_isomorphism(g1: SubNetwork, g2: SubNetwork) -> Optional[IsoMap]:
    """Index-dropping isomorphism fixing the party order, or ``None``."""
    if len(g1.parties) != len(g2.parties):
        return None
    if g1.signature() != g2.signature():
        return None
    m1 = _source_by_positions(g1.host, g1.parties)
    m2 = _source_by_positions(g2.host, g2.parties)
    src = tuple(sorted((m1[key], m2[key]) for key in m1))
    return IsoMap(g1, g2, tuple(zip(g1.parties, g2.parties)), src)

"""Compilation of the inflation feasibility test into a linear system.

Variables are the raw probabilities ``Q(outputs | inputs)`` of every party
copy of every inflation block.  All rows are equalities ``A q = b`` with
small integer coefficients; ``b`` is an exact constant plus, for rows pinned
to the observed behavior, a sum of entries of ``P``.  Keeping ``P`` out of
``A`` lets one structure serve a whole noise sweep.

Marginal rows fix the inputs of the summed-out parties to 0.  That is only
legitimate because every block also carries explicit nonsignalling rows.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import scipy.sparse as sp

from .behaviors import Behavior, BehaviorError, check_nonsignalling
from .exact import format_exact
from .inflation import TooLargeError, canonical_orderings
from .network import Inflation, PartyRef, PartySpec, Scenario, canonical_scenario

log = logging.getLogger(__name__)

DEFAULT_MAX_VARIABLES = 10**6

TAG_ORDER = ("normalization", "nonsignalling", "C1", "C2+", "independence")


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    """Variable block: the joint behavior of ``parties`` inside ``inflation``."""

    inflation: Inflation
    parties: Tuple[PartyRef, ...]
    offset: int

    @property
    def specs(self) -> Tuple[PartySpec, ...]:
        return tuple(self.inflation.base.parties[j] for j, _ in self.parties)

    @property
    def shape(self) -> Tuple[int, ...]:
        s = self.specs
        return tuple(p.n_inputs for p in s) + tuple(p.n_outputs for p in s)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def index_array(self) -> np.ndarray:
        return self.offset + np.arange(self.size, dtype=np.int64).reshape(self.shape)


def _marginal_columns(idx: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    """Columns summed by each row of the marginal on ``positions`` (in order).

    ``idx`` is an index array shaped ``inputs + outputs``.  Inputs of the
    other parties are fixed to 0.  Returns an array of shape
    ``(n_rows, n_summed)`` whose rows follow (inputs, outputs) C order.
    """
    m = idx.ndim // 2
    positions = list(positions)
    rest = [q for q in range(m) if q not in positions]
    sel = tuple(slice(None) if q in positions else 0 for q in range(m))
    sub = idx[sel]  # axes: inputs of kept (sorted), then all m outputs
    kept_sorted = sorted(positions)
    k = len(kept_sorted)
    in_axes = [kept_sorted.index(q) for q in positions]
    out_axes = [k + q for q in positions] + [k + q for q in rest]
    sub = np.transpose(sub, in_axes + out_axes)
    n_rows = int(np.prod(sub.shape[:2 * k])) if k else 1
    return sub.reshape(n_rows, -1)


class _UnionFind:
    def __init__(self):
        self.parent: Dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != x:
            gp = self.parent.setdefault(p, p)
            self.parent[x] = gp
            x, p = p, gp
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class SystemStructure:
    """Everything about the LP that does not depend on the observed behavior."""

    scenario: Scenario
    blocks: Tuple[Block, ...]
    matrix: sp.csr_matrix          # integer coefficients
    tags: Tuple[str, ...]
    keys: Tuple[str, ...]
    const: Tuple[Fraction, ...]
    p_map: Tuple[Optional[Tuple[int, ...]], ...]
    order: int = 0

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_vars(self) -> int:
        return self.matrix.shape[1]

    def tag_counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for t in self.tags:
            out[t] = out.get(t, 0) + 1
        return out

    @cached_property
    def p_matrix(self) -> sp.csr_matrix:
        """Sparse map from P's flat entries to the P-dependent part of ``b``."""
        rows, cols = [], []
        for r, m in enumerate(self.p_map):
            if m:
                rows.extend([r] * len(m))
                cols.extend(m)
        n_p = int(np.prod([p.n_inputs * p.n_outputs for p in self.scenario.parties]))
        return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n_rows, n_p))


@dataclass
class ConstraintSystem:
    structure: SystemStructure
    p: Behavior
    mode: str

    @property
    def matrix(self) -> sp.csr_matrix:
        return self.structure.matrix

    @property
    def n_rows(self) -> int:
        return self.structure.n_rows

    @property
    def n_vars(self) -> int:
        return self.structure.n_vars

    @property
    def blocks(self):
        return self.structure.blocks

    @property
    def tags(self):
        return self.structure.tags

    def rhs_exact(self) -> List:
        """Exact right-hand side (``Fraction`` or ``QSqrt2`` entries)."""
        p = self.p if self.p.exact else self.p.to_rational()
        flat = p.flat()
        out = []
        for c, m in zip(self.structure.const, self.structure.p_map):
            v = c
            if m:
                v = v + sum((flat[k] for k in m), Fraction(0))
            out.append(v)
        return out

    def rhs_float(self) -> np.ndarray:
        flat = self.p.to_float().flat()
        const = np.array([float(c) for c in self.structure.const])
        return const + self.structure.p_matrix @ flat


# ---------------------------------------------------------------------------


def _block_ns_rows(block: Block):
    idx = block.index_array()
    m = len(block.parties)
    rows = []
    for q in range(m):
        n_in = block.specs[q].n_inputs
        if n_in < 2:
            continue
        for t in range(1, n_in):
            def slab(x):
                a = np.take(idx, x, axis=q)                  # drop input axis q
                a = np.moveaxis(a, m - 1 + q, -1)            # output axis q last
                return a.reshape(-1, a.shape[-1])
            plus, minus = slab(t), slab(0)
            for r in range(plus.shape[0]):
                rows.append((plus[r], minus[r]))
    return rows


def _block_norm_rows(block: Block):
    idx = block.index_array()
    m = len(block.parties)
    n_in = int(np.prod(block.shape[:m]))
    return idx.reshape(n_in, -1)


def build_structure(scenario: Scenario, blocks_spec: Sequence[Tuple[Inflation, Sequence[PartyRef]]],
                    max_variables: int = DEFAULT_MAX_VARIABLES) -> SystemStructure:
    """Assemble rows for the given blocks (inflation + party cut) over ``scenario``."""
    blocks = []
    offset = 0
    for inf, parties in blocks_spec:
        if inf.base != scenario:
            raise CompileError("inflation built over a different scenario")
        b = Block(inf, tuple(parties), offset)
        offset += b.size
        blocks.append(b)
    if offset > max_variables:
        raise TooLargeError(f"{offset} LP variables exceed the cap of {max_variables}")

    entries: List[Tuple[str, int, str, List[Tuple[np.ndarray, int]], Fraction, Optional[Tuple[int, ...]]]] = []

    for bi, b in enumerate(blocks):
        for r, cols in enumerate(_block_norm_rows(b)):
            entries.append(("normalization", bi, f"{r:06d}", [(cols, 1)], Fraction(1), None))
        for r, (plus, minus) in enumerate(_block_ns_rows(b)):
            entries.append(("nonsignalling", bi, f"{r:06d}", [(plus, 1), (minus, -1)], Fraction(0), None))

    _marginal_rows(scenario, blocks, entries)

    order = sorted(range(len(entries)),
                   key=lambda e: (TAG_ORDER.index(entries[e][0]), entries[e][1], entries[e][2]))
    rows_i, cols_i, vals = [], [], []
    tags, keys, const, p_map = [], [], [], []
    for new_r, e in enumerate(order):
        tag, bi, key, terms, c, pm = entries[e]
        acc: Dict[int, int] = {}
        for cols, coef in terms:
            for col in np.asarray(cols).ravel():
                acc[int(col)] = acc.get(int(col), 0) + coef
        for col, v in sorted(acc.items()):
            if v:
                rows_i.append(new_r)
                cols_i.append(col)
                vals.append(v)
        tags.append(tag)
        keys.append(f"{bi}:{key}")
        const.append(c)
        p_map.append(pm)
    mat = sp.csr_matrix((np.array(vals, dtype=np.int64), (rows_i, cols_i)),
                        shape=(len(order), offset))
    orders = {b.inflation.order for b in blocks}
    return SystemStructure(scenario, tuple(blocks), mat, tuple(tags), tuple(keys),
                           tuple(const), tuple(p_map), max(orders) if orders else 0)


def _marginal_rows(scenario: Scenario, blocks: Sequence[Block], entries: list):
    """C1 and C2+ rows via a union-find over canonically ordered sub-networks.

    Every sub-network of every block (and of the base network, standing for
    ``P``) is grouped by its canonical signature.  Within a group each
    canonical ordering must carry the same marginal as the group reference.
    Groups are processed largest first and every emitted equality also
    records all the marginal equalities it implies, so implied rows are
    never emitted.
    """
    P_HOST = -1
    base = Inflation.trivial(scenario)
    hosts = {P_HOST: (base, base.party_copies)}
    for bi, b in enumerate(blocks):
        hosts[bi] = (b.inflation, b.parties)

    canon: Dict[Tuple[int, frozenset], Tuple[tuple, tuple]] = {}

    def canon_of(h, subset):
        key = (h, subset)
        if key not in canon:
            canon[key] = canonical_orderings(hosts[h][0], subset)
        return canon[key]

    groups: Dict[tuple, List[Tuple[int, frozenset]]] = {}
    for h, (inf, parties) in hosts.items():
        for r in range(len(parties), 0, -1):
            for c in combinations(parties, r):
                s = frozenset(c)
                sig, _ = canon_of(h, s)
                groups.setdefault(sig, []).append((h, s))

    uf = _UnionFind()

    def restrict_union(u, v):
        (h1, o1), (h2, o2) = u, v
        n = len(o1)
        for r in range(1, n + 1):
            for pos in combinations(range(n), r):
                r1 = tuple(o1[t] for t in pos)
                r2 = tuple(o2[t] for t in pos)
                c1 = canon_of(h1, frozenset(r1))[1][0]
                where = {p: t for t, p in enumerate(r1)}
                r2n = tuple(r2[where[p]] for p in c1)
                uf.union((h1, c1), (h2, r2n))

    p_idx = np.arange(int(np.prod([p.n_inputs * p.n_outputs for p in scenario.parties])),
                      dtype=np.int64).reshape(
        tuple(p.n_inputs for p in scenario.parties) + tuple(p.n_outputs for p in scenario.parties))
    block_idx = {bi: b.index_array() for bi, b in enumerate(blocks)}

    def positions(h, ordering):
        parties = hosts[h][1]
        return [parties.index(p) for p in ordering]

    def label(h, ordering):
        names = scenario.parties
        return ",".join(f"{names[j].name}{k + 1}" for j, k in ordering)

    for sig in sorted(groups, key=lambda s: (-len(s[0]), s)):
        members = sorted(groups[sig], key=lambda m: (m[0] != P_HOST, m[0], sorted(m[1])))
        h0, s0 = members[0]
        ref = (h0, canon_of(h0, s0)[1][0])
        for h, s in members:
            for o in canon_of(h, s)[1]:
                node = (h, o)
                if uf.find(node) == uf.find(ref):
                    continue
                cols_node = _marginal_columns(block_idx[h], positions(h, o))
                if ref[0] == P_HOST:
                    pcols = _marginal_columns(p_idx, positions(P_HOST, ref[1]))
                    for r in range(cols_node.shape[0]):
                        entries.append(("C1", h, f"{label(h, o)}#{r:06d}", [(cols_node[r], 1)],
                                        Fraction(0), tuple(int(k) for k in pcols[r])))
                else:
                    cols_ref = _marginal_columns(block_idx[ref[0]], positions(ref[0], ref[1]))
                    for r in range(cols_node.shape[0]):
                        entries.append(("C2+", h, f"{label(h, o)}~{ref[0]}:{label(*ref)}#{r:06d}",
                                        [(cols_node[r], 1), (cols_ref[r], -1)], Fraction(0), None))
                restrict_union(ref, node)


def compile_system(scenario: Scenario, p: Behavior, inflations: Sequence[Inflation], *,
                   structure: Optional[SystemStructure] = None, tolerance: float = 1e-9,
                   max_variables: int = DEFAULT_MAX_VARIABLES) -> ConstraintSystem:
    """LP whose feasibility is the inflation test of ``p`` over ``inflations``."""
    if not inflations:
        raise CompileError("inflation list is empty")
    if tuple(p.parties) != tuple(scenario.parties):
        raise CompileError(f"behavior parties {p.names} do not match the scenario")
    if not check_nonsignalling(p, tolerance):
        raise CompileError("observed behavior is signalling")
    if structure is None:
        structure = build_structure(scenario, [(inf, inf.party_copies) for inf in inflations],
                                    max_variables=max_variables)
    return ConstraintSystem(structure, p, p.mode)


def dump_sparse(system: ConstraintSystem, fh: TextIO, exact: bool = True):
    """Line-oriented dump: ``R row tag rhs`` headers then ``E row col coef`` entries."""
    s = system.structure
    rhs = system.rhs_exact() if exact else list(system.rhs_float())
    fh.write("# losrcert sparse system v1\n")
    fh.write(f"# rows {s.n_rows} cols {s.n_vars}\n")
    coo = s.matrix.tocoo()
    by_row: Dict[int, List[Tuple[int, int]]] = {}
    for r, c, v in zip(coo.row, coo.col, coo.data):
        by_row.setdefault(int(r), []).append((int(c), int(v)))
    for r in range(s.n_rows):
        val = format_exact(rhs[r]) if exact else repr(float(rhs[r]))
        fh.write(f"R {r} {s.tags[r]} {val}\n")
        for c, v in sorted(by_row.get(r, [])):
            fh.write(f"E {r} {c} {v}\n")


# ---------------------------------------------------------------------------
# shared-randomness no-go


def shared_bit_behavior(n: int) -> Behavior:
    parties = [PartySpec(f"A{j + 1}", 1, 2) for j in range(n)]
    half = Fraction(1, 2)
    return Behavior.from_function(parties, lambda x, a: half if len(set(a)) == 1 else Fraction(0))


def shared_bit_inflation(scenario: Scenario) -> Inflation:
    """Order-2 inflation where ``A_i^1`` sees originals ``S_j`` (j > i) and clones (j < i)."""
    n = scenario.n_parties
    wiring = []
    for i, att in enumerate(scenario.attachment):
        row_orig = tuple(0 if j < i else 1 for j in att)
        row_clone = tuple(1 - c for c in row_orig)
        wiring.append((row_orig, row_clone))
    return Inflation(scenario, 2, tuple(wiring))


def shared_bit_system(n: int) -> ConstraintSystem:
    """LP for the N-party shared random bit on the ring inflation cut.

    Besides the C1 rows found automatically, the first and last party of
    the chain share no source, so their joint output is pinned to the
    product of their (uniform) marginals.
    """
    if n < 3:
        raise CompileError("shared-bit argument needs n >= 3")
    p = shared_bit_behavior(n)
    scenario = canonical_scenario(n, p.parties)
    inf = shared_bit_inflation(scenario)
    cut = tuple((j, 0) for j in range(n))
    structure = build_structure(scenario, [(inf, cut)])
    block = structure.blocks[0]
    cols = _marginal_columns(block.index_array(), [0, n - 1])
    extra_rows = [(cols[r], Fraction(1, 4)) for r in range(cols.shape[0])]
    mat = sp.vstack([structure.matrix] + [
        sp.csr_matrix((np.ones(len(c), dtype=np.int64), (np.zeros(len(c), dtype=np.int64), c)),
                      shape=(1, structure.n_vars)) for c, _ in extra_rows]).tocsr()
    structure = SystemStructure(
        scenario, structure.blocks, mat,
        structure.tags + ("independence",) * len(extra_rows),
        structure.keys + tuple(f"0:A1,A{n}#{r:06d}" for r in range(len(extra_rows))),
        structure.const + tuple(c for _, c in extra_rows),
        structure.p_map + (None,) * len(extra_rows), 2)
    return ConstraintSystem(structure, p, p.mode)

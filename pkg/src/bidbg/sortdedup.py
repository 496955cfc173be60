"""Sorted construction pipeline: enumerate, sort, dedup, collect, adjacency.

This is the in-memory fast path.  Work is instrumented, not timed: every
stage adds its record touches to BuildStats, and the pass counts it reports
depend only on k, never on input size.  Those counters are what the
linear-work tests assert against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .edgegen import BiEdge, Orientation
from .errors import ContractError, IntegrityError
from .graph import BiGraph
from .kmer import Kmer, validate_k
from .reads import ReadSet


@dataclass
class EdgeList:
    """Edge records as columns; `unique` is set once duplicates are merged."""

    k: int
    u: np.ndarray
    v: np.ndarray
    ori: np.ndarray
    mult: np.ndarray
    unique: bool = False

    def __len__(self) -> int:
        return len(self.u)

    def __iter__(self):
        for i in range(len(self.u)):
            yield BiEdge(
                Kmer(self.k, int(self.u[i])),
                Kmer(self.k, int(self.v[i])),
                Orientation((int(self.ori[i]) >> 7) & 1),
                Orientation((int(self.ori[i]) >> 6) & 1),
                int(self.mult[i]),
            )

    @classmethod
    def from_biedges(cls, k: int, edges) -> "EdgeList":
        edges = list(edges)
        u = np.array([e.u.word for e in edges], dtype=np.uint64)
        v = np.array([e.v.word for e in edges], dtype=np.uint64)
        ori = np.array(
            [
                (e.o1.value << 7) | (e.o2.value << 6) | (1 if e.is_self_loop else 0)
                for e in edges
            ],
            dtype=np.uint8,
        )
        mult = np.array([e.mult for e in edges], dtype=np.uint32)
        return cls(k, u, v, ori, mult)

    @classmethod
    def empty(cls, k: int) -> "EdgeList":
        return cls(
            k,
            np.empty(0, dtype=np.uint64),
            np.empty(0, dtype=np.uint64),
            np.empty(0, dtype=np.uint8),
            np.empty(0, dtype=np.uint32),
        )

    def is_sorted(self) -> bool:
        if len(self) < 2:
            return True
        lo, hi = kernels.record_sort_keys(self.u, self.v, self.ori, self.k)
        if hi is None:
            return bool(np.all(lo[1:] >= lo[:-1]))
        up = hi[1:] > hi[:-1]
        eq = hi[1:] == hi[:-1]
        return bool(np.all(up | (eq & (lo[1:] >= lo[:-1]))))


@dataclass
class VertexList:
    """Sorted unique canonical k-mer words."""

    k: int
    words: np.ndarray

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        for w in self.words:
            yield Kmer(self.k, int(w))


@dataclass
class BuildStats:
    """Work ledger for one build.

    record_touches counts every time a record (or endpoint word) is read or
    written by a pipeline stage; each sort pass touches each record once.
    Pass counts are fixed by k: ceil((4k+4)/8) edge-sort passes and
    ceil(2k/8) vertex-sort passes.
    """

    k: int = 0
    symbols_in: int = 0
    fragments_used: int = 0
    fragments_skipped: int = 0
    records_enumerated: int = 0
    edge_sort_passes: int = 0
    vertex_sort_passes: int = 0
    record_touches: int = 0
    edges_unique: int = 0
    vertices: int = 0
    mult_saturated: int = 0
    self_loops: int = 0
    notes: dict = field(default_factory=dict)

    def touches_per_symbol(self) -> float:
        return self.record_touches / max(1, self.symbols_in)


def enumerate_records(reads: ReadSet, k: int, stats: BuildStats | None = None) -> EdgeList:
    """All canonical records of the read set and its reverse complements."""
    validate_k(k)
    us, vs, oris = [], [], []
    skipped = 0
    for frag in reads.fragments:
        if len(frag) < k + 1:
            skipped += 1
            continue
        u, v, ori = kernels.edge_records_for_codes(kernels.encode_codes(frag), k)
        us.append(u)
        vs.append(v)
        oris.append(ori)
    if us:
        u = np.concatenate(us)
        v = np.concatenate(vs)
        ori = np.concatenate(oris)
    else:
        return EdgeList.empty(k)
    el = EdgeList(k, u, v, ori, np.ones(len(u), dtype=np.uint32))
    if stats is not None:
        stats.k = k
        stats.symbols_in += reads.symbols_kept
        stats.fragments_used += len(reads.fragments) - skipped
        stats.fragments_skipped += skipped
        stats.records_enumerated += len(el)
        stats.record_touches += len(el)
    return el


def sort_edges(el: EdgeList, stats: BuildStats | None = None) -> EdgeList:
    """Stable radix sort on (u, v, o1, o2); a permutation of the input."""
    perm, passes = kernels.radix_sort_records(el.u, el.v, el.ori, el.k)
    out = EdgeList(el.k, el.u[perm], el.v[perm], el.ori[perm], el.mult[perm])
    if stats is not None:
        stats.edge_sort_passes = passes
        stats.record_touches += passes * len(el)
    return out


def dedup_count(el: EdgeList, stats: BuildStats | None = None) -> EdgeList:
    """Merge equal records, summing multiplicities.  Input must be sorted."""
    if not el.is_sorted():
        raise ContractError("dedup_count needs sorted input")
    u, v, ori, mult, sat = kernels.dedup_sorted_records(el.u, el.v, el.ori, el.mult)
    out = EdgeList(el.k, u, v, ori, mult, unique=True)
    if stats is not None:
        stats.record_touches += len(el)
        stats.edges_unique = len(out)
        stats.mult_saturated += sat
        stats.self_loops = int(np.count_nonzero(ori & 1))
    return out


def collect_vertices(el: EdgeList, stats: BuildStats | None = None) -> VertexList:
    """Sorted unique endpoint set of a unique edge list."""
    if not el.unique:
        raise ContractError("collect_vertices needs a deduplicated edge list")
    words = np.concatenate([el.u, el.v])
    perm, passes = kernels.radix_sort_words(words, el.k)
    words = words[perm]
    if len(words):
        keep = np.concatenate([[True], words[1:] != words[:-1]])
        words = words[keep]
    vl = VertexList(el.k, words)
    if stats is not None:
        stats.vertex_sort_passes = passes
        stats.record_touches += (passes + 1) * 2 * len(el)
        stats.vertices = len(vl)
    return vl


def build_adjacency(vl: VertexList, el: EdgeList, stats: BuildStats | None = None) -> BiGraph:
    """Adjacency build; every endpoint of el must appear in vl."""
    if not el.unique:
        raise ContractError("build_adjacency needs a deduplicated edge list")
    if vl.k != el.k:
        raise ContractError("vertex and edge lists disagree on k")
    g = BiGraph(el.k, vl.words, el.u, el.v, el.ori, el.mult)
    if stats is not None:
        # mirroring writes two half-edges per record, then one sorting step
        stats.record_touches += 4 * len(el)
    return g


def build_in_memory(reads: ReadSet, k: int, stats: BuildStats | None = None) -> BiGraph:
    """The whole in-memory pipeline: enumerate, sort, dedup, collect, adjacency."""
    own = stats if stats is not None else BuildStats()
    el = enumerate_records(reads, k, own)
    n_enum = len(el)
    el = sort_edges(el, own)
    el = dedup_count(el, own)
    if own.mult_saturated == 0 and int(el.mult.sum(dtype=np.uint64)) != n_enum:
        raise IntegrityError("multiplicity conservation violated")
    vl = collect_vertices(el, own)
    return build_adjacency(vl, el, own)

"""Partitioned construction with exactly counted messages.

par_biconstruct deals the read fragments out to p workers in contiguous
blocks.  Each worker enumerates its edge records, merges local duplicates
(the combiner step), and routes every surviving record to the worker owning
its u endpoint; the owner is a deterministic hash of the word, so the same
record from two workers always meets at one place.  The message ledger
counts post-combine records that cross a worker boundary, nothing else:
with one worker nothing crosses and the total is zero.  Owners merge what
they receive and the partitions are reduced in a final sort, which makes
the output byte-identical to the sequential build for every p.

ja_emulate mimics the competing all-to-all strategy: every distinct
canonical k-mer is a representative, and each representative posts one
candidate message per alphabet symbol per strand (eight here) proposing the
neighbor that extension would imply.  A proposed edge materializes whenever
the proposed neighbor happens to exist anywhere in the input, regardless of
whether the two k-mers were ever adjacent in a read, which is how spurious
edges arise.  Every candidate message is counted, so the two ledgers make
the strategies' message totals directly comparable on the same input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractError
from .graph import BiGraph
from .kmer import validate_k
from .reads import ReadSet
from .sortdedup import EdgeList, VertexList, build_adjacency, collect_vertices, dedup_count, enumerate_records, sort_edges

_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SPLITMIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SPLITMIX_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(words) -> np.ndarray:
    """Deterministic 64-bit mix of word values; vectorized."""
    z = np.asarray(words, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _SPLITMIX_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _SPLITMIX_M1
        z = (z ^ (z >> np.uint64(27))) * _SPLITMIX_M2
        z = z ^ (z >> np.uint64(31))
    return z


@dataclass(frozen=True, slots=True)
class PartitionPlan:
    """Worker count plus the record-to-worker assignment rule."""

    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ContractError("worker count must be >= 1")

    def owner_of_words(self, words) -> np.ndarray:
        return (splitmix64(words) % np.uint64(self.p)).astype(np.int64)

    def owner_of(self, word: int) -> int:
        return int(self.owner_of_words(np.array([word], dtype=np.uint64))[0])


@dataclass(slots=True)
class MessageLedger:
    """Exact per-worker sent/received record counts."""

    p: int
    alphabet_size: int = 4
    sent: list = field(default_factory=list)
    received: list = field(default_factory=list)

    def __post_init__(self):
        if not self.sent:
            self.sent = [0] * self.p
        if not self.received:
            self.received = [0] * self.p

    def post(self, src: int, dst: int, count: int = 1) -> None:
        self.sent[src] += count
        self.received[dst] += count

    @property
    def total_messages(self) -> int:
        return sum(self.sent)

    def balanced(self) -> bool:
        return sum(self.sent) == sum(self.received)


def _fragment_blocks(fragments, p):
    n = len(fragments)
    bounds = [round(i * n / p) for i in range(p + 1)]
    return [fragments[bounds[i]:bounds[i + 1]] for i in range(p)]


def _concat_edge_lists(k, parts) -> EdgeList:
    parts = [el for el in parts if len(el)]
    if not parts:
        return EdgeList.empty(k)
    return EdgeList(
        k,
        np.concatenate([el.u for el in parts]),
        np.concatenate([el.v for el in parts]),
        np.concatenate([el.ori for el in parts]),
        np.concatenate([el.mult for el in parts]),
    )


def par_biconstruct(reads: ReadSet, k: int, p: int):
    """Partitioned build; returns (graph, message ledger).

    The graph equals the sequential build byte for byte, for every p.
    """
    validate_k(k)
    plan = PartitionPlan(p)
    ledger = MessageLedger(p)

    inboxes = [[] for _ in range(p)]
    for w, block in enumerate(_fragment_blocks(reads.fragments, p)):
        sub = ReadSet(fragments=list(block))
        el = enumerate_records(sub, k)
        if not len(el):
            continue
        el = dedup_count(sort_edges(el))  # combiner: merge local duplicates
        owners = plan.owner_of_words(el.u)
        for dst in range(p):
            mask = owners == dst
            cnt = int(np.count_nonzero(mask))
            if cnt == 0:
                continue
            if dst != w:
                ledger.post(w, dst, cnt)
            inboxes[dst].append(
                EdgeList(k, el.u[mask], el.v[mask], el.ori[mask], el.mult[mask]))

    merged = []
    for dst in range(p):
        part = _concat_edge_lists(k, inboxes[dst])
        if len(part):
            merged.append(dedup_count(sort_edges(part)))
    el = _concat_edge_lists(k, merged)
    el = dedup_count(sort_edges(el))
    vl = collect_vertices(el)
    return build_adjacency(vl, el), ledger


def representative_words(reads: ReadSet, k: int) -> np.ndarray:
    """Sorted distinct canonical k-mer words over every read window."""
    seen = []
    for frag in reads.fragments:
        if len(frag) < k:
            continue
        words = kernels.pack_words(kernels.encode_codes(frag), k)
        seen.append(np.minimum(words, kernels.revcomp_words(words, k)))
    if not seen:
        return np.empty(0, dtype=np.uint64)
    return np.unique(np.concatenate(seen))


def ja_candidate_pairs(rep: str) -> list:
    """The candidate neighbor proposals one representative posts.

    Four suffix extensions per strand: for k-mer AAT the plus strand
    proposes (AAT, ATA), (AAT, ATG), (AAT, ATT) and (AAT, ATC).
    """
    from .kmer import reverse_complement_str

    out = []
    for oriented in (rep, reverse_complement_str(rep)):
        for c in "ACGT":
            out.append((oriented, oriented[1:] + c))
    return out


def ja_emulate(reads: ReadSet, k: int, p: int):
    """All-to-all candidate strategy; returns (graph, message ledger).

    Edges appear whenever both proposed endpoints exist, adjacency in any
    read never checked, so the output can strictly contain the real graph.
    Every candidate message is counted, existing target or not.
    """
    validate_k(k)
    plan = PartitionPlan(p)
    ledger = MessageLedger(p)

    reps = representative_words(reads, k)
    n = len(reps)
    if n == 0:
        empty = EdgeList.empty(k)
        empty.unique = True
        return build_adjacency(VertexList(k, reps), empty), ledger

    mask = np.uint64((1 << (2 * k)) - 1)
    rep_owner = plan.owner_of_words(reps)
    batches = []
    for o1 in (0, 1):
        oriented = reps if o1 == 0 else kernels.revcomp_words(reps, k)
        for code in range(4):
            with np.errstate(over="ignore"):
                ext = ((oriented << np.uint64(2)) | np.uint64(code)) & mask
            ext_rc = kernels.revcomp_words(ext, k)
            y = np.minimum(ext, ext_rc)
            o2 = (ext_rc < ext).astype(np.uint8)
            dst = plan.owner_of_words(y)
            for src in range(p):
                m = rep_owner == src
                for d, c in zip(*np.unique(dst[m], return_counts=True)):
                    ledger.post(int(src), int(d), int(c))
            exists = np.isin(y, reps, assume_unique=False)
            if not exists.any():
                continue
            uu = reps[exists]
            vv = y[exists]
            a = np.full(len(uu), o1, dtype=np.uint8)
            b = o2[exists]
            swap = uu > vv
            uu2 = np.where(swap, vv, uu)
            vv2 = np.where(swap, uu, vv)
            a2 = np.where(swap, 1 - b, a)
            b2 = np.where(swap, 1 - a, b)
            loop = uu2 == vv2
            norm = loop & (a2 == 1) & (b2 == 1)
            a2 = np.where(norm, 0, a2)
            b2 = np.where(norm, 0, b2)
            ori = (a2 << 7 | b2 << 6 | loop.astype(np.uint8)).astype(np.uint8)
            batches.append(EdgeList(k, uu2, vv2, ori,
                                    np.ones(len(uu2), dtype=np.uint32)))

    el = _concat_edge_lists(k, batches)
    if len(el):
        el = dedup_count(sort_edges(el))
        el.mult[:] = 1  # proposals carry no occurrence counts
    else:
        el.unique = True
    return build_adjacency(VertexList(k, reps), el), ledger


# --- comparison report --------------------------------------------------------

CSV_HEADER = "mode,p,n_symbols,n_k1mers,messages_sent,spurious_edges"


def csv_line(mode, p, n_symbols, n_k1mers, messages_sent, spurious_edges) -> str:
    return "%s,%d,%d,%d,%d,%d" % (
        mode, p, n_symbols, n_k1mers, messages_sent, spurious_edges)


def count_symbols(reads: ReadSet) -> int:
    return sum(len(f) for f in reads.fragments)


def count_k1mers(reads: ReadSet, k: int) -> int:
    """Records the enumeration will emit: both strands of every window."""
    return 2 * sum(max(0, len(f) - k) for f in reads.fragments)


def _edge_keys(g: BiGraph):
    u, v, ori, _ = g.edge_records()
    return set(zip(u.tolist(), v.tolist(), ori.tolist()))


@dataclass(slots=True)
class ComparisonReport:
    k: int
    p: int
    n_symbols: int
    n_k1mers: int
    par_graph: BiGraph
    ja_graph: BiGraph
    par_ledger: MessageLedger
    ja_ledger: MessageLedger
    spurious_edges: int

    @property
    def ratio(self) -> float:
        par = self.par_ledger.total_messages
        return float("inf") if par == 0 else self.ja_ledger.total_messages / par

    def csv_lines(self) -> list:
        return [
            csv_line("par", self.p, self.n_symbols, self.n_k1mers,
                     self.par_ledger.total_messages, 0),
            csv_line("ja", self.p, self.n_symbols, self.n_k1mers,
                     self.ja_ledger.total_messages, self.spurious_edges),
        ]


def compare_strategies(reads: ReadSet, k: int, p: int) -> ComparisonReport:
    par_g, par_l = par_biconstruct(reads, k, p)
    ja_g, ja_l = ja_emulate(reads, k, p)
    spurious = len(_edge_keys(ja_g) - _edge_keys(par_g))
    return ComparisonReport(
        k=k, p=p,
        n_symbols=count_symbols(reads),
        n_k1mers=count_k1mers(reads, k),
        par_graph=par_g, ja_graph=ja_g,
        par_ledger=par_l, ja_ledger=ja_l,
        spurious_edges=spurious,
    )

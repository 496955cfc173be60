"""Chain compaction: merge maximal linear runs of vertices into labeled nodes.

The bi-directed graph is first doubled into an ordinary directed graph: every
vertex v becomes two nodes v+ and v- (traverse v on the positive / negative
strand), and an edge (u, v, o1, o2) becomes the arc pair

    u^sign(o1) -> v^sign(o2)        v^flip(sign(o2)) -> u^flip(sign(o1))

so that directed reachability in the doubled graph coincides with valid
bi-directed walks.  Compactable chains are the maximal directed paths over
the candidate arcs whose endpoints all have in- and out-degree at most one;
self-loop edges never qualify.  Each path is spelled into a label, paired
with its reverse-complement twin (the arc rules are mirror-symmetric, so the
twin path always exists), deduplicated, and chains of at least three
vertices replace their members in the rewritten graph.

Ranking strategies.  rank_chains follows next-pointers in memory.
segmented_rank_chains splits the arc list into contiguous per-worker
segments, links fragments locally, and stitches across workers.
ooc_rank_chains drives ooc_list_rank, which contracts (x, y) tuple files by
repeated external sorting: one pass sorts the live tuples by y and a copy by
x, merges tuples sharing a link value, and repeats.  A pass here is two such
matching rounds (emitting by y, then by x), which is what guarantees the
live tuple count at least halves per pass on acyclic inputs; a single
maximal matching round cannot promise that, because a blocked middle merge
can leave two of every three tuples live.  Tuples whose both endpoints are
known dead ends retire into finished spans.  Cycles contract down to a
self-tuple (x, x), are expanded through the merge log, and are broken by
deleting the arc with the smallest key, mirror-consistently so twin cycles
stay twins.  The merge log and the retired spans are held in memory: they
are O(live tuples) id pairs, while the tuple streams themselves live on
disk and pay for every sort through the shared I/O ledger.

All three strategies emit identical span lists (sorted by head node), so
their chain sets compare byte for byte.
"""

from __future__ import annotations

import io as _stdio
import os
import shutil
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, IntegrityError
from .extsort import ExtConfig, IoLedger, external_sort, make_spill_dir
from .kmer import Strand, reverse_complement_str, validate_k
from .records import HEADER_BYTES, RECORD_BYTES, RECORD_DTYPE, read_header, unpack_columns, write_record_file

PLUS = Strand.POS
MINUS = Strand.NEG

# sort-key width used for tuple files; node ids must fit the u field of it
_TUPLE_K = 15
_TUPLE_ID_LIMIT = 1 << 30

# tuple flag bits, carried in the record orientation byte across passes
_LEFT_DEAD = 0x01
_RIGHT_DEAD = 0x02


@dataclass(frozen=True, slots=True)
class TransformedNode:
    """One strand of a vertex: base vertex id plus the strand sign."""

    base: int
    sign: Strand

    @property
    def tid(self) -> int:
        return 2 * self.base + (0 if self.sign is PLUS else 1)

    @classmethod
    def of_tid(cls, tid: int) -> "TransformedNode":
        return cls(tid >> 1, PLUS if (tid & 1) == 0 else MINUS)

    def __str__(self) -> str:
        return "%d%s" % (self.base, "+" if self.sign is PLUS else "-")


def _tid(vid: int, o: int) -> int:
    return 2 * vid + o


def _mirror_arc(f: int, t: int) -> tuple[int, int]:
    return (t ^ 1, f ^ 1)


class DirectedTransform:
    """Directed doubling of a bi-directed graph: 2|V| nodes, 2 arcs per edge."""

    def __init__(self, graph, arc_from, arc_to, arc_edge, arc_loop):
        self.graph = graph
        self.n_base = graph.n_vertices
        self.arc_from = np.asarray(arc_from, dtype=np.int64)
        self.arc_to = np.asarray(arc_to, dtype=np.int64)
        self.arc_edge = np.asarray(arc_edge, dtype=np.int64)
        self.arc_loop = np.asarray(arc_loop, dtype=bool)
        n = self.n_nodes
        self.out_degree = np.bincount(self.arc_from, minlength=n).astype(np.int64)
        self.in_degree = np.bincount(self.arc_to, minlength=n).astype(np.int64)
        order = np.argsort(self.arc_from, kind="stable")
        self._adj_targets = self.arc_to[order]
        self._adj_sorted_from = self.arc_from[order]

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_base

    @property
    def n_arcs(self) -> int:
        return len(self.arc_from)

    def arcs(self):
        for f, t in zip(self.arc_from, self.arc_to):
            yield TransformedNode.of_tid(int(f)), TransformedNode.of_tid(int(t))

    def reachable_from(self, tid: int) -> set[int]:
        """All node ids reachable from tid, tid included."""
        seen = {int(tid)}
        stack = [int(tid)]
        while stack:
            x = stack.pop()
            lo = int(np.searchsorted(self._adj_sorted_from, x, side="left"))
            hi = int(np.searchsorted(self._adj_sorted_from, x, side="right"))
            for j in range(lo, hi):
                y = int(self._adj_targets[j])
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen


def list_ranking_transform(g) -> DirectedTransform:
    """Double g into the directed graph whose paths are valid bi-directed walks."""
    u = g.edge_uid.astype(np.int64)
    v = g.edge_vid.astype(np.int64)
    o1 = g.edge_o1.astype(np.int64)
    o2 = g.edge_o2.astype(np.int64)
    eidx = np.arange(len(u), dtype=np.int64)
    arc_from = np.concatenate([2 * u + o1, 2 * v + (1 - o2)])
    arc_to = np.concatenate([2 * v + o2, 2 * u + (1 - o1)])
    arc_edge = np.concatenate([eidx, eidx])
    arc_loop = np.concatenate([g.edge_loop, g.edge_loop])
    return DirectedTransform(g, arc_from, arc_to, arc_edge, arc_loop)


class CandidateEdgeSet:
    """Arcs restricted to linear regions: every endpoint has degree <= 1.

    Arc order is (from, to) ascending; from-values and to-values are each
    unique, which is what makes the ranking strategies deterministic.
    """

    def __init__(self, graph, arc_from, arc_to, arc_edge):
        self.graph = graph
        self.arc_from = np.asarray(arc_from, dtype=np.int64)
        self.arc_to = np.asarray(arc_to, dtype=np.int64)
        self.arc_edge = np.asarray(arc_edge, dtype=np.int64)
        if len(np.unique(self.arc_from)) != len(self.arc_from):
            raise IntegrityError("candidate arcs share an out-endpoint")
        if len(np.unique(self.arc_to)) != len(self.arc_to):
            raise IntegrityError("candidate arcs share an in-endpoint")

    def __len__(self) -> int:
        return len(self.arc_from)

    @property
    def tuples(self):
        return [
            (TransformedNode.of_tid(int(f)), TransformedNode.of_tid(int(t)))
            for f, t in zip(self.arc_from, self.arc_to)
        ]


def find_candidates(t: DirectedTransform) -> CandidateEdgeSet:
    """Arcs whose both endpoints have in- and out-degree <= 1; loops excluded."""
    f, to = t.arc_from, t.arc_to
    ok = (
        ~t.arc_loop
        & (t.out_degree[f] <= 1)
        & (t.in_degree[f] <= 1)
        & (t.out_degree[to] <= 1)
        & (t.in_degree[to] <= 1)
    )
    idx = np.flatnonzero(ok)
    order = idx[np.lexsort((to[idx], f[idx]))]
    return CandidateEdgeSet(t.graph, f[order], to[order], t.arc_edge[order])


@dataclass(frozen=True, slots=True)
class Chain:
    """A compactable run of vertices with its spelled label.

    bases/signs give the walk (entry strand per vertex); label is its spell,
    canonical_label the smaller of label and its reverse complement.  edges
    lists the graph edge ids the chain consumes, in walk order.
    """

    bases: tuple[int, ...]
    signs: tuple[Strand, ...]
    label: str
    canonical_label: str
    member_count: int
    edges: tuple[int, ...]


class ChainRanking:
    """Sequence of Chain plus the ranking report (cycles broken, costs)."""

    def __init__(self, chains, cycles_broken, arc_paths, live_counts=None,
                 ledger=None, worker_ops=None):
        self.chains = list(chains)
        self.cycles_broken = cycles_broken
        self.arc_paths = arc_paths
        self.live_counts = live_counts
        self.ledger = ledger
        self.worker_ops = worker_ops

    def __len__(self) -> int:
        return len(self.chains)

    def __getitem__(self, i):
        return self.chains[i]

    def __iter__(self):
        return iter(self.chains)


def _oriented_label(g, vid: int, sign_bit: int) -> str:
    seq = g.vertex_seq(vid)
    return seq if sign_bit == 0 else reverse_complement_str(seq)


def _spell_tids(g, tids) -> str:
    k = g.k
    out = [_oriented_label(g, tids[0] >> 1, tids[0] & 1)]
    for t in tids[1:]:
        out.append(_oriented_label(g, t >> 1, t & 1)[k - 1:])
    return "".join(out)


def _chain_from_arcs(c: CandidateEdgeSet, arc_ids) -> Chain:
    tids = [int(c.arc_from[arc_ids[0]])] + [int(c.arc_to[a]) for a in arc_ids]
    label = _spell_tids(c.graph, tids)
    rc = reverse_complement_str(label)
    return Chain(
        bases=tuple(t >> 1 for t in tids),
        signs=tuple(PLUS if (t & 1) == 0 else MINUS for t in tids),
        label=label,
        canonical_label=min(label, rc),
        member_count=len(tids),
        edges=tuple(int(c.arc_edge[a]) for a in arc_ids),
    )


def _chains_from_paths(c, paths, cycles_broken, **extra) -> ChainRanking:
    return ChainRanking([_chain_from_arcs(c, p) for p in paths],
                        cycles_broken, paths, **extra)


def _break_cycle(arcs_in_order):
    """Index of the arc to delete from a cycle, given (from, to) pairs.

    The choice minimizes (min(key, mirror key), key), so a cycle and its
    reverse-complement twin delete mirror arcs and stay twins.
    """
    best = None
    best_i = -1
    for i, (f, t) in enumerate(arcs_in_order):
        key = (f, t)
        pair = (min(key, _mirror_arc(f, t)), key)
        if best is None or pair < best:
            best = pair
            best_i = i
    return best_i


def _paths_in_memory(c: CandidateEdgeSet):
    m = len(c)
    by_from = {int(f): i for i, f in enumerate(c.arc_from)}
    has_in = set(int(t) for t in c.arc_to)
    visited = [False] * m
    paths = []
    heads = sorted(f for f in by_from if f not in has_in)
    for h in heads:
        path = []
        i = by_from[h]
        while True:
            visited[i] = True
            path.append(i)
            nxt = int(c.arc_to[i])
            i = by_from.get(nxt)
            if i is None or visited[i]:
                break
        paths.append(path)
    cycles = 0
    for start in range(m):
        if visited[start]:
            continue
        cyc = []
        i = start
        while not visited[i]:
            visited[i] = True
            cyc.append(i)
            i = by_from[int(c.arc_to[i])]
        cycles += 1
        drop = _break_cycle([(int(c.arc_from[a]), int(c.arc_to[a])) for a in cyc])
        # twin of the deleted arc may sit in this same cycle; drop it too so
        # the remaining spans still pair up under reverse complement
        f0, t0 = int(c.arc_from[cyc[drop]]), int(c.arc_to[cyc[drop]])
        mirror = _mirror_arc(f0, t0)
        rotated = cyc[drop + 1:] + cyc[:drop]
        second = [
            j for j, a in enumerate(rotated)
            if (int(c.arc_from[a]), int(c.arc_to[a])) == mirror
        ]
        if second:
            j = second[0]
            for piece in (rotated[:j], rotated[j + 1:]):
                if piece:
                    paths.append(piece)
        elif rotated:
            paths.append(rotated)
    paths.sort(key=lambda p: int(c.arc_from[p[0]]))
    return paths, cycles


def rank_chains(c: CandidateEdgeSet) -> ChainRanking:
    """Maximal directed paths over the candidate arcs, spelled into chains."""
    paths, cycles = _paths_in_memory(c)
    return _chains_from_paths(c, paths, cycles)


def segmented_rank_chains(c: CandidateEdgeSet, p: int) -> ChainRanking:
    """Same chains as rank_chains, computed by p workers over arc segments.

    Each worker links the arcs of its contiguous segment into fragments
    using only local lookups; the fragments are then stitched sequentially.
    The output is identical for every p.
    """
    if p < 1:
        raise ContractError("worker count must be >= 1")
    m = len(c)
    if m == 0:
        return _chains_from_paths(c, [], 0, worker_ops=tuple([0] * p))
    bounds = [round(i * m / p) for i in range(p + 1)]
    fragments = []  # (head_tid, tail_tid, [arc ids]) in discovery order
    cyclic = []
    ops = []
    for w in range(p):
        lo, hi = bounds[w], bounds[w + 1]
        count = 0
        local_by_from = {}
        local_tos = set()
        for i in range(lo, hi):
            local_by_from[int(c.arc_from[i])] = i
            local_tos.add(int(c.arc_to[i]))
            count += 1
        used = set()
        for i in sorted(range(lo, hi), key=lambda j: int(c.arc_from[j])):
            if i in used or int(c.arc_from[i]) in local_tos:
                continue
            run = []
            j = i
            while j is not None and j not in used:
                used.add(j)
                run.append(j)
                count += 1
                j = local_by_from.get(int(c.arc_to[j]))
            fragments.append((int(c.arc_from[run[0]]), int(c.arc_to[run[-1]]), run))
        for i in range(lo, hi):  # leftovers are cycles wholly inside the segment
            if i in used:
                continue
            cyc = []
            j = i
            while j not in used:
                used.add(j)
                cyc.append(j)
                count += 1
                j = local_by_from[int(c.arc_to[j])]
            cyclic.append(cyc)
        ops.append(count)

    frag_by_from = {f[0]: f for f in fragments}
    frag_tos = set(f[1] for f in fragments)
    frag_used = set()
    paths = []
    for head in sorted(frag_by_from):
        if head in frag_tos or id(frag_by_from[head]) in frag_used:
            continue
        arcs = []
        f = frag_by_from.get(head)
        while f is not None and id(f) not in frag_used:
            frag_used.add(id(f))
            arcs.extend(f[2])
            f = frag_by_from.get(f[1])
        paths.append(arcs)
    cycles = 0
    for f in fragments:  # fragment rings that survived the path sweep
        if id(f) in frag_used:
            continue
        arcs = []
        g = f
        while id(g) not in frag_used:
            frag_used.add(id(g))
            arcs.extend(g[2])
            g = frag_by_from[g[1]]
        cyclic.append(arcs)
    for cyc in cyclic:
        cycles += 1
        drop = _break_cycle([(int(c.arc_from[a]), int(c.arc_to[a])) for a in cyc])
        f0, t0 = int(c.arc_from[cyc[drop]]), int(c.arc_to[cyc[drop]])
        mirror = _mirror_arc(f0, t0)
        rotated = cyc[drop + 1:] + cyc[:drop]
        second = [
            j for j, a in enumerate(rotated)
            if (int(c.arc_from[a]), int(c.arc_to[a])) == mirror
        ]
        if second:
            j = second[0]
            for piece in (rotated[:j], rotated[j + 1:]):
                if piece:
                    paths.append(piece)
        elif rotated:
            paths.append(rotated)
    paths.sort(key=lambda q: int(c.arc_from[q[0]]))
    return _chains_from_paths(c, paths, cycles, worker_ops=tuple(ops))


def canonicalize_chains(chains) -> list[Chain]:
    """One representative per twin pair, chains shorter than 3 dropped."""
    groups: dict[str, Chain] = {}
    for ch in chains:
        if ch.member_count < 3:
            continue
        cur = groups.get(ch.canonical_label)
        if cur is None or ch.label < cur.label:
            groups[ch.canonical_label] = ch
    return [groups[key] for key in sorted(groups)]


class LabeledBiGraph:
    """Bi-directed graph whose vertices carry labels of length >= k.

    The simplified graph: ordinary vertices keep their k-mer label, chain
    nodes carry their spelled label.  Edges still mean a (k-1)-symbol
    overlap between oriented labels, checked at construction.
    """

    def __init__(self, k, labels, edge_uid, edge_vid, edge_o1, edge_o2, edge_mult):
        validate_k(k)
        self.k = k
        self.labels = tuple(labels)
        for i, lab in enumerate(self.labels):
            if len(lab) < k:
                raise ContractError("label %r shorter than k" % (lab,))
            if lab > reverse_complement_str(lab):
                raise ContractError("label %r is not canonical" % (lab,))
            if i and self.labels[i - 1] >= lab:
                raise ContractError("labels must be sorted strictly ascending")
        self.edge_uid = np.asarray(edge_uid, dtype=np.int64)
        self.edge_vid = np.asarray(edge_vid, dtype=np.int64)
        self.edge_o1 = np.asarray(edge_o1, dtype=np.uint8)
        self.edge_o2 = np.asarray(edge_o2, dtype=np.uint8)
        self.edge_mult = np.asarray(edge_mult, dtype=np.uint32)
        self.edge_loop = self.edge_uid == self.edge_vid
        n = len(self.labels)
        for e in range(len(self.edge_uid)):
            u, v = int(self.edge_uid[e]), int(self.edge_vid[e])
            if not (0 <= u < n and 0 <= v < n):
                raise IntegrityError("edge endpoint out of range")
            if u > v:
                raise ContractError("edges must be stored with u <= v")
            a = _oriented_label(self, u, int(self.edge_o1[e]))
            b = _oriented_label(self, v, int(self.edge_o2[e]))
            if a[-(self.k - 1):] != b[:self.k - 1]:
                raise IntegrityError(
                    "edge %d does not overlap: %r / %r" % (e, a, b))

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edge_uid)

    def vertex_seq(self, vid: int) -> str:
        if not 0 <= vid < len(self.labels):
            raise ContractError("vertex id %r out of range" % (vid,))
        return self.labels[vid]

    def vertex_id(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ContractError("no vertex labeled %r" % (label,)) from None

    def edge_tuple(self, e: int):
        return (int(self.edge_uid[e]), int(self.edge_vid[e]),
                int(self.edge_o1[e]), int(self.edge_o2[e]))

    def signature(self):
        return (
            self.k,
            self.labels,
            tuple(
                (int(self.edge_uid[e]), int(self.edge_vid[e]),
                 int(self.edge_o1[e]), int(self.edge_o2[e]),
                 int(self.edge_mult[e]))
                for e in range(self.n_edges)
            ),
        )


@dataclass(slots=True)
class SimplifyReport:
    chains_reported: int = 0
    vertices_merged: int = 0
    edges_compacted: int = 0
    edges_reattached: int = 0
    edges_dropped: int = 0
    cycles_broken: int = 0
    n_vertices_before: int = 0
    n_vertices_after: int = 0

    @property
    def node_reduction(self) -> float:
        if self.n_vertices_before == 0:
            return 0.0
        return 1.0 - self.n_vertices_after / self.n_vertices_before


def simplify_with_report(g):
    """Compact all reported chains of g; returns (graph, report).

    Reported chains become single nodes labeled canonically; their member
    vertices and interior edges disappear.  Boundary edges re-attach at the
    chain ends when the (k-1)-overlap against the new label still holds,
    and are dropped (and counted) otherwise.  A graph with nothing to
    compact is returned unchanged, the same object.
    """
    t = list_ranking_transform(g)
    c = find_candidates(t)
    ranking = rank_chains(c)
    reported = canonicalize_chains(ranking)
    report = SimplifyReport(
        cycles_broken=ranking.cycles_broken,
        n_vertices_before=g.n_vertices,
        n_vertices_after=g.n_vertices,
    )
    if not reported:
        return g, report

    report.chains_reported = len(reported)
    members: set[int] = set()
    consumed: set[int] = set()
    # exit-slot map: (vertex, exit orientation) -> (chain index, new exit).
    # A chain's free slots are its tail exit and the mirrored head entry;
    # every other slot of a member vertex is welded inside the node.
    port_exit: dict[tuple[int, int], tuple[int, int]] = {}
    for ci, ch in enumerate(reported):
        if ch.label != ch.canonical_label:
            raise IntegrityError("reported chain is not the canonical twin")
        members.update(ch.bases)
        consumed.update(ch.edges)
        s0 = 0 if ch.signs[0] is PLUS else 1
        sm = 0 if ch.signs[-1] is PLUS else 1
        port_exit[(ch.bases[-1], sm)] = (ci, 0)
        port_exit[(ch.bases[0], 1 - s0)] = (ci, 1)
    report.vertices_merged = len(members)
    report.edges_compacted = len(consumed)

    survivors = [vid for vid in range(g.n_vertices) if vid not in members]
    entries = [(g.vertex_seq(vid), ("v", vid)) for vid in survivors]
    entries += [(ch.canonical_label, ("c", ci)) for ci, ch in enumerate(reported)]
    entries.sort()
    new_id: dict[tuple[str, int], int] = {}
    labels = []
    for i, (lab, key) in enumerate(entries):
        labels.append(lab)
        new_id[key] = i

    def resolve_exit(vid: int, o: int):
        if vid not in members:
            return new_id[("v", vid)], o
        hit = port_exit.get((vid, o))
        if hit is None:
            return None
        ci, no = hit
        return new_id[("c", ci)], no

    agg: dict[tuple[int, int, int, int], int] = {}
    ng = len(labels)
    tmp = LabeledBiGraph.__new__(LabeledBiGraph)  # label access for overlap check
    tmp.k = g.k
    tmp.labels = tuple(labels)
    for e in range(g.n_edges):
        if e in consumed:
            continue
        u, v = int(g.edge_uid[e]), int(g.edge_vid[e])
        o1, o2 = int(g.edge_o1[e]), int(g.edge_o2[e])
        a = resolve_exit(u, o1)
        b = resolve_exit(v, 1 - o2)
        if a is None or b is None:
            report.edges_dropped += 1
            continue
        nu, no1 = a
        nv, no2 = b[0], 1 - b[1]
        out_lab = _oriented_label(tmp, nu, no1)
        in_lab = _oriented_label(tmp, nv, no2)
        if out_lab[-(g.k - 1):] != in_lab[:g.k - 1]:
            report.edges_dropped += 1
            continue
        if labels[nu] > labels[nv]:
            nu, nv, no1, no2 = nv, nu, 1 - no2, 1 - no1
        if nu == nv and no1 == 1 and no2 == 1:
            no1 = no2 = 0
        key = (nu, nv, no1, no2)
        agg[key] = agg.get(key, 0) + int(g.edge_mult[e])
        report.edges_reattached += 1

    keys = sorted(agg)
    out = LabeledBiGraph(
        g.k,
        labels,
        np.array([k[0] for k in keys], dtype=np.int64),
        np.array([k[1] for k in keys], dtype=np.int64),
        np.array([k[2] for k in keys], dtype=np.uint8),
        np.array([k[3] for k in keys], dtype=np.uint8),
        np.array([min(agg[k], 0xFFFFFFFF) for k in keys], dtype=np.uint32),
    )
    assert ng == out.n_vertices
    report.n_vertices_after = out.n_vertices
    return out, report


def simplify(g):
    """Compact all reported chains of g; see simplify_with_report."""
    out, _ = simplify_with_report(g)
    return out


# --- out-of-core tuple contraction -------------------------------------------


@dataclass(slots=True)
class OocRanking:
    """Result of ooc_list_rank: spans as input tuple index paths."""

    n_tuples: int
    spans: list
    cycles_broken: int
    live_counts: list
    passes: int
    ledger: IoLedger

    def node_spans(self, xs, ys):
        return [[xs[p[0]]] + [ys[a] for a in p] for p in self.spans]


def _write_tuples(path, u, v, ori, ids, ledger):
    nbytes = write_record_file(path, _TUPLE_K, u, v, ori, ids)
    ledger.charge_write(nbytes)
    return nbytes


def _read_tuple_batches(path, block, ledger):
    per = max(1, block // RECORD_BYTES)
    with open(path, "rb") as fh:
        head = fh.read(HEADER_BYTES)
        ledger.charge_read(len(head))
        _, count = read_header(_stdio.BytesIO(head))
        remaining = count
        while remaining > 0:
            take = min(per, remaining)
            raw = fh.read(take * RECORD_BYTES)
            ledger.charge_read(len(raw))
            yield unpack_columns(np.frombuffer(raw, dtype=RECORD_DTYPE))
            remaining -= take


def _iter_records(batches):
    for u, v, ori, mult in batches:
        for i in range(len(u)):
            yield int(u[i]), int(v[i]), int(ori[i]), int(mult[i])


def _swapped_batches(batches):
    for u, v, ori, mult in batches:
        yield v, u, ori, mult


def ooc_list_rank(tuples, budget: ExtConfig, ledger: IoLedger | None = None) -> OocRanking:
    """Contract a set of (x, y) tuples into maximal spans, out of core.

    tuples is an iterable of (x, y) integer pairs in which x values are
    unique and y values are unique (a union of paths and cycles).  Returns
    the spans as paths of input tuple indices, plus per-pass live counts,
    the broken-cycle count, and the I/O ledger the sorts were charged to.
    """
    xs = []
    ys = []
    seen_x = set()
    seen_y = set()
    for x, y in tuples:
        x, y = int(x), int(y)
        if not (0 <= x < _TUPLE_ID_LIMIT and 0 <= y < _TUPLE_ID_LIMIT):
            raise ContractError("tuple endpoints must be in [0, 2^30)")
        if x in seen_x or y in seen_y:
            raise ContractError("duplicate tuple endpoint breaks the degree rule")
        seen_x.add(x)
        seen_y.add(y)
        xs.append(x)
        ys.append(y)
    n = len(xs)
    if ledger is None:
        ledger = IoLedger(budget.B)
    result = OocRanking(n, [], 0, [], 0, ledger)
    if n == 0:
        return result

    # merge log: merged id -> (left id, right id); leaves are input indices
    log: dict[int, tuple[int, int]] = {}
    next_id = n

    def expand(mid: int):
        out = []
        stack = [mid]
        while stack:
            i = stack.pop()
            if i < n:
                out.append(i)
            else:
                l, r = log[i]
                stack.append(r)
                stack.append(l)
        return out

    def retire(mid: int):
        arcs = expand(mid)
        result.spans.append(arcs)

    def break_cycle(mid: int):
        arcs = expand(mid)
        result.cycles_broken += 1
        drop = _break_cycle([(xs[a], ys[a]) for a in arcs])
        mirror = _mirror_arc(xs[arcs[drop]], ys[arcs[drop]])
        rotated = arcs[drop + 1:] + arcs[:drop]
        second = [j for j, a in enumerate(rotated) if (xs[a], ys[a]) == mirror]
        if second:
            j = second[0]
            for piece in (rotated[:j], rotated[j + 1:]):
                if piece:
                    result.spans.append(piece)
        elif rotated:
            result.spans.append(rotated)

    root = make_spill_dir(budget)
    try:
        carry = os.path.join(root, "carry-0")
        _write_tuples(
            carry,
            np.array(xs, dtype=np.uint64),
            np.array(ys, dtype=np.uint64),
            np.zeros(n, dtype=np.uint8),
            np.arange(n, dtype=np.uint32),
            ledger,
        )
        live = n
        serial = 0
        max_passes = 2 * max(1, n).bit_length() + 8
        while live > 0:
            if result.passes >= max_passes:
                raise IntegrityError("tuple contraction stalled")
            for sub in (0, 1):
                # sub 0 emits tuples ordered by y and learns right-end
                # verdicts; sub 1 orders by x and learns left ends
                emit_word = (lambda b: _swapped_batches(b)) if sub == 0 else (lambda b: b)
                emit_sorted, _ = external_sort(
                    emit_word(_read_tuple_batches(carry, budget.B, ledger)),
                    _TUPLE_K, budget, ledger)
                partner_sorted, _ = external_sort(
                    (_read_tuple_batches(carry, budget.B, ledger) if sub == 0
                     else _swapped_batches(_read_tuple_batches(carry, budget.B, ledger))),
                    _TUPLE_K, budget, ledger)
                emit = _iter_records(emit_sorted)
                partner = _iter_records(partner_sorted)
                dead_bit = _RIGHT_DEAD if sub == 0 else _LEFT_DEAD

                # records buffered until the scan ends: a tuple written as an
                # unmatched emission can still merge later as a partner (its
                # emission key may precede its partner key), so the flush
                # filters out everything consumed by the time the scan is done
                pending: list[tuple[int, int, int, int]] = []
                consumed: dict[int, int] = {}

                def flush(path):
                    keep = [r for r in pending if r[3] not in consumed]
                    _write_tuples(
                        path,
                        np.array([r[0] for r in keep], dtype=np.uint64),
                        np.array([r[1] for r in keep], dtype=np.uint64),
                        np.array([r[2] for r in keep], dtype=np.uint8),
                        np.array([r[3] for r in keep], dtype=np.uint32),
                        ledger,
                    )
                    return len(keep)

                def emit_record(x, y, flags, tid):
                    if (flags & _LEFT_DEAD) and (flags & _RIGHT_DEAD):
                        retire(tid)
                        return
                    pending.append((x, y, flags, tid))

                e = next(emit, None)
                p = next(partner, None)
                while e is not None:
                    # emission records are (key, other); re-derive (x, y)
                    ek, eo, efl, eid = e
                    ex, ey = (eo, ek) if sub == 0 else (ek, eo)
                    if p is not None and p[0] < ek:
                        p = next(partner, None)
                        continue
                    if p is None or p[0] > ek:
                        if eid not in consumed:
                            emit_record(ex, ey, efl | dead_bit, eid)
                        e = next(emit, None)
                        continue
                    pk, po, pfl, pid = p
                    px, py = (pk, po) if sub == 0 else (po, pk)
                    if eid == pid:
                        if eid not in consumed:
                            break_cycle(eid)
                            consumed[eid] = -1
                        e = next(emit, None)
                        p = next(partner, None)
                        continue
                    if eid in consumed or pid in consumed:
                        if eid not in consumed:
                            emit_record(ex, ey, efl, eid)
                        e = next(emit, None)
                        p = next(partner, None)
                        continue
                    if sub == 0:
                        mx, my = ex, py
                        mfl = (efl & _LEFT_DEAD) | (pfl & _RIGHT_DEAD)
                        log[next_id] = (eid, pid)
                    else:
                        mx, my = px, ey
                        mfl = (pfl & _LEFT_DEAD) | (efl & _RIGHT_DEAD)
                        log[next_id] = (pid, eid)
                    consumed[eid] = next_id
                    consumed[pid] = next_id
                    emit_record(mx, my, mfl, next_id)
                    next_id += 1
                    e = next(emit, None)
                    p = next(partner, None)

                emit_sorted.close()
                partner_sorted.close()
                serial += 1
                nxt = os.path.join(root, "carry-%d" % serial)
                live = flush(nxt)
                os.remove(carry)
                carry = nxt
                if live == 0:
                    break
            result.passes += 1
            result.live_counts.append(live)
    finally:
        shutil.rmtree(root, ignore_errors=True)
    result.spans.sort(key=lambda pth: xs[pth[0]])
    return result


def ooc_rank_chains(c: CandidateEdgeSet, budget: ExtConfig,
                    ledger: IoLedger | None = None) -> ChainRanking:
    """rank_chains computed through the out-of-core tuple contraction."""
    rk = ooc_list_rank(
        zip((int(x) for x in c.arc_from), (int(y) for y in c.arc_to)),
        budget, ledger)
    return _chains_from_paths(c, rk.spans, rk.cycles_broken,
                              live_counts=rk.live_counts, ledger=rk.ledger)

"""Bi-directed graph model: walks, spelling, degrees, and a definition oracle.

Walk validity uses strand semantics.  Traversing an edge (u, v, o1, o2) from
u exits u on strand +/- for o1 = FWD/REV and enters v on the strand named the
same way by o2; a walk is valid when every entry strand equals the following
exit strand.  The first vertex's entry strand is part of the walk itself.

brute_force_build is the test oracle: it constructs the graph directly from
the adjacent-k-mer definition with string comparisons, no packing, no radix
machinery, and is only meant for small inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edgegen import Orientation
from .errors import ContractError, IntegrityError, WalkStructureError
from .kmer import Strand, decode_word, encode_word, reverse_complement_str, validate_k
from .reads import ReadSet

FWD = Orientation.FWD
REV = Orientation.REV

_SIDES = ("pos-out", "pos-in", "neg-out", "neg-in")


def _strand(o: int) -> Strand:
    return Strand.POS if o == 0 else Strand.NEG


@dataclass(frozen=True, slots=True)
class HalfEdge:
    """One adjacency entry of vertex `owner`: traverse owner -> nbr.

    o1 is the exit orientation at owner, o2 the entry orientation at nbr;
    mirrored entries are already flipped, so the tuple reads the same way on
    both sides of an edge.
    """

    owner: int
    nbr: int
    o1: int
    o2: int
    mult: int
    edge: int
    loop: bool


@dataclass(frozen=True, slots=True)
class Walk:
    """Vertex ids joined by edge ids, plus the first vertex's entry strand."""

    entry: Strand
    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1 or not self.vertices:
            raise WalkStructureError(
                "walk needs n+1 vertices for n edges, got %d/%d"
                % (len(self.vertices), len(self.edges))
            )


class BiGraph:
    """Immutable bi-directed graph over canonical k-mer vertices.

    Vertices are dense ids ranking the sorted canonical words.  Every edge
    appears in both endpoints' adjacency lists (twice in one list for a
    self-loop), mirrored entries orientation-flipped.
    """

    def __init__(self, k, vertex_words, edge_u, edge_v, edge_ori, edge_mult):
        validate_k(k)
        self.k = k
        vw = np.asarray(vertex_words, dtype=np.uint64)
        if vw.size and not (np.all(vw[1:] > vw[:-1])):
            raise ContractError("vertex words must be sorted strictly ascending")
        self.vertex_words = vw
        eu = np.asarray(edge_u, dtype=np.uint64)
        ev = np.asarray(edge_v, dtype=np.uint64)
        self.edge_uid = self._ids_of(eu)
        self.edge_vid = self._ids_of(ev)
        ori = np.asarray(edge_ori, dtype=np.uint8)
        self.edge_o1 = ((ori >> 7) & 1).astype(np.uint8)
        self.edge_o2 = ((ori >> 6) & 1).astype(np.uint8)
        self.edge_loop = (ori & 1).astype(bool)
        self.edge_mult = np.asarray(edge_mult, dtype=np.uint32)
        if np.any((self.edge_uid == self.edge_vid) != self.edge_loop):
            raise IntegrityError("self-loop flag disagrees with endpoints")
        if np.any(eu > ev):
            raise ContractError("edges must be stored with u <= v")
        self._build_csr()
        self._edge_lookup = None

    def _ids_of(self, words: np.ndarray) -> np.ndarray:
        if words.size == 0:
            return np.empty(0, dtype=np.int64)
        nv = len(self.vertex_words)
        ids = np.searchsorted(self.vertex_words, words)
        if nv == 0 or np.any(ids >= nv) or np.any(
            self.vertex_words[np.minimum(ids, nv - 1)] != words
        ):
            raise IntegrityError("edge endpoint not present in vertex list")
        return ids.astype(np.int64)

    def _build_csr(self) -> None:
        m = len(self.edge_uid)
        eidx = np.arange(m, dtype=np.int64)
        owner = np.concatenate([self.edge_uid, self.edge_vid])
        nbr = np.concatenate([self.edge_vid, self.edge_uid])
        o1 = np.concatenate([self.edge_o1, 1 - self.edge_o2])
        o2 = np.concatenate([self.edge_o2, 1 - self.edge_o1])
        edge = np.concatenate([eidx, eidx])
        order = np.lexsort((edge, o2, o1, nbr, owner))
        self.csr_owner = owner[order]
        self.csr_nbr = nbr[order]
        self.csr_o1 = o1[order].astype(np.uint8)
        self.csr_o2 = o2[order].astype(np.uint8)
        self.csr_edge = edge[order]
        counts = np.bincount(owner, minlength=self.n_vertices) if m else np.zeros(self.n_vertices, dtype=np.int64)
        self.csr_indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_words)

    @property
    def n_edges(self) -> int:
        return len(self.edge_uid)

    def vertex_seq(self, vid: int) -> str:
        self._check_vid(vid)
        return decode_word(int(self.vertex_words[vid]), self.k)

    def vertex_id(self, seq_or_word) -> int:
        word = encode_word(seq_or_word) if isinstance(seq_or_word, str) else int(seq_or_word)
        i = int(np.searchsorted(self.vertex_words, np.uint64(word)))
        if i >= self.n_vertices or self.vertex_words[i] != word:
            raise ContractError("no vertex for %r" % (seq_or_word,))
        return i

    def _check_vid(self, vid: int) -> None:
        if not 0 <= vid < self.n_vertices:
            raise ContractError("vertex id %r out of range" % (vid,))

    def half_edges(self, vid: int) -> list[HalfEdge]:
        self._check_vid(vid)
        lo, hi = self.csr_indptr[vid], self.csr_indptr[vid + 1]
        return [
            HalfEdge(
                vid,
                int(self.csr_nbr[j]),
                int(self.csr_o1[j]),
                int(self.csr_o2[j]),
                int(self.edge_mult[self.csr_edge[j]]),
                int(self.csr_edge[j]),
                bool(self.edge_loop[self.csr_edge[j]]),
            )
            for j in range(lo, hi)
        ]

    def degree(self, vid: int, side: str) -> int:
        """Half-edge count by the strand role the edge gives this vertex.

        pos-out counts exits on strand +, pos-in entries on strand +; the
        neg sides are the strand-flipped readings of the same list.
        """
        self._check_vid(vid)
        if side not in _SIDES:
            raise ContractError("side must be one of %s" % (_SIDES,))
        lo, hi = self.csr_indptr[vid], self.csr_indptr[vid + 1]
        exits = self.csr_o1[lo:hi]
        if side == "pos-out" or side == "neg-in":
            return int(np.count_nonzero(exits == 0))
        return int(np.count_nonzero(exits == 1))

    def edge_tuple(self, e: int):
        return (
            int(self.edge_uid[e]),
            int(self.edge_vid[e]),
            int(self.edge_o1[e]),
            int(self.edge_o2[e]),
        )

    def find_edge(self, uid: int, vid: int, o1: int, o2: int) -> int:
        """Edge id for a record given in either stored or mirrored form."""
        if self._edge_lookup is None:
            self._edge_lookup = {
                self.edge_tuple(e): e for e in range(self.n_edges)
            }
        key = (uid, vid, o1, o2)
        if key in self._edge_lookup:
            return self._edge_lookup[key]
        mirror = (vid, uid, 1 - o2, 1 - o1)
        if mirror in self._edge_lookup:
            return self._edge_lookup[mirror]
        raise ContractError("no edge %r" % (key,))

    def _step_readings(self, a: int, b: int, e: int):
        """(exit_o, enter_o) readings for traversing edge e from a to b."""
        u, v = int(self.edge_uid[e]), int(self.edge_vid[e])
        o1, o2 = int(self.edge_o1[e]), int(self.edge_o2[e])
        if u == v:
            if a != u or b != u:
                raise WalkStructureError("edge %d is a loop on %d, walk uses %d->%d" % (e, u, a, b))
            outs = [(o1, o2), (1 - o2, 1 - o1)]
            return outs if outs[0] != outs[1] else outs[:1]
        if (a, b) == (u, v):
            return [(o1, o2)]
        if (a, b) == (v, u):
            return [(1 - o2, 1 - o1)]
        raise WalkStructureError("edge %d joins %d-%d, walk uses %d->%d" % (e, u, v, a, b))

    def walk_strands(self, w: Walk):
        """One consistent per-vertex entry strand assignment, or None.

        Depth-first over the (at most two) readings each self-loop allows;
        plain edges are forced.  The first vertex's strand is w.entry.
        """
        for e in w.edges:
            if not 0 <= e < self.n_edges:
                raise WalkStructureError("edge id %d out of range" % e)
        for vtx in w.vertices:
            self._check_vid(vtx)

        n = len(w.edges)

        def extend(i: int, strand: Strand, acc):
            if i == n:
                return acc
            a, b = w.vertices[i], w.vertices[i + 1]
            for exit_o, enter_o in self._step_readings(a, b, w.edges[i]):
                if _strand(exit_o) is strand:
                    got = extend(i + 1, _strand(enter_o), acc + [_strand(enter_o)])
                    if got is not None:
                        return got
            return None

        return extend(0, w.entry, [w.entry])

    def is_valid_walk(self, w: Walk) -> bool:
        return self.walk_strands(w) is not None

    def spell_walk(self, w: Walk) -> str:
        strands = self.walk_strands(w)
        if strands is None:
            raise ContractError("cannot spell an invalid walk")
        out = [self._oriented_seq(w.vertices[0], strands[0])]
        for vtx, s in zip(w.vertices[1:], strands[1:]):
            out.append(self._oriented_seq(vtx, s)[-1])
        return "".join(out)

    def _oriented_seq(self, vid: int, strand: Strand) -> str:
        seq = self.vertex_seq(vid)
        return seq if strand is Strand.POS else reverse_complement_str(seq)

    def walk_of_read(self, read: str) -> Walk:
        """The walk a read traces through the graph; errors if any piece is absent."""
        k = self.k
        if len(read) < k:
            raise ContractError("read shorter than k")
        kmers = [read[i:i + k] for i in range(len(read) - k + 1)]
        vids = []
        for s in kmers:
            rc = reverse_complement_str(s)
            vids.append(self.vertex_id(min(s, rc)))
        first_rc = reverse_complement_str(kmers[0])
        entry = Strand.POS if kmers[0] <= first_rc else Strand.NEG
        edges = []
        from .edgegen import make_canonical_edge

        for i in range(len(kmers) - 1):
            rec = make_canonical_edge(read[i:i + k + 1])
            e = self.find_edge(
                self.vertex_id(rec.u.word), self.vertex_id(rec.v.word),
                rec.o1.value, rec.o2.value,
            )
            edges.append(e)
        return Walk(entry, tuple(vids), tuple(edges))

    def signature(self):
        """Hashable full-content signature for graph equality in tests."""
        return (
            self.k,
            tuple(self.vertex_words.tolist()),
            tuple(
                (int(self.edge_uid[e]), int(self.edge_vid[e]),
                 int(self.edge_o1[e]), int(self.edge_o2[e]),
                 int(self.edge_mult[e]))
                for e in range(self.n_edges)
            ),
        )

    def edge_records(self):
        """Edges as (u word, v word, ori byte, mult) column arrays, stored order."""
        u = self.vertex_words[self.edge_uid]
        v = self.vertex_words[self.edge_vid]
        ori = (
            (self.edge_o1.astype(np.uint8) << 7)
            | (self.edge_o2.astype(np.uint8) << 6)
            | self.edge_loop.astype(np.uint8)
        )
        return u, v, ori, self.edge_mult.copy()


def _string_record(x: str, y: str):
    """Canonical record for adjacent k-mers x, y by string comparison only."""
    rx = reverse_complement_str(x)
    ry = reverse_complement_str(y)
    u, o1 = (x, 0) if x <= rx else (rx, 1)
    v, o2 = (y, 0) if y <= ry else (ry, 1)
    if u > v:
        u, v, o1, o2 = v, u, 1 - o2, 1 - o1
    if u == v and o1 == 1 and o2 == 1:
        o1 = o2 = 0
    return u, v, o1, o2


def brute_force_build(reads, k: int) -> BiGraph:
    """Definition-based construction: the oracle the fast path is tested against.

    Walks every string of S and its reverse complement, makes a vertex of
    every k-molecule seen and an edge of every adjacent k-mer pair.  Note a
    fragment of exactly k symbols contributes a vertex with no edges here;
    the sorted pipeline only ever sees vertices through edge endpoints, which
    is the one place the two constructions can differ.
    """
    validate_k(k)
    if isinstance(reads, ReadSet):
        frags = [f.decode() for f in reads.fragments]
    else:
        frags = [f.decode() if isinstance(f, bytes) else str(f) for f in reads]
    both = []
    for f in frags:
        both.append(f)
        both.append(reverse_complement_str(f))
    vertices = set()
    counts: dict[tuple[str, str, int, int], int] = {}
    for z in both:
        for i in range(len(z) - k + 1):
            x = z[i:i + k]
            vertices.add(min(x, reverse_complement_str(x)))
        for i in range(len(z) - k):
            key = _string_record(z[i:i + k], z[i + 1:i + k + 1])
            counts[key] = counts.get(key, 0) + 1
    vwords = np.array(sorted(encode_word(s) for s in vertices), dtype=np.uint64)
    keys = sorted(counts, key=lambda t: (encode_word(t[0]), encode_word(t[1]), t[2], t[3]))
    eu = np.array([encode_word(u) for u, _, _, _ in keys], dtype=np.uint64)
    ev = np.array([encode_word(v) for _, v, _, _ in keys], dtype=np.uint64)
    ori = np.array(
        [(o1 << 7) | (o2 << 6) | (1 if u == v else 0) for u, v, o1, o2 in keys],
        dtype=np.uint8,
    )
    mult = np.array([min(counts[t], 0xFFFFFFFF) for t in keys], dtype=np.uint32)
    return BiGraph(k, vwords, eu, ev, ori, mult)

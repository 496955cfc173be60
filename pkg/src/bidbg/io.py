"""Read ingestion, graph serialization, and plain-text reports.

FASTA and FASTQ are detected by content, never by file name, and either may
arrive gzip-compressed.  Graphs leave the package two ways: GFA v1 for
interoperability and a native binary table for lossless round-trips into
the simplifier.  GFA has no bi-directed edge concept, so each L line keeps
our per-endpoint orientations (forward maps to '+', reverse to '-') and the
mirror convention makes that encoding faithful; the graph order k rides in
a header tag because an edgeless file has no overlap field to recover it
from.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from . import records
from .compact import LabeledBiGraph
from .errors import ConfigError, FormatError, InvalidSymbolError
from .extsort import ExtConfig
from .graph import BiGraph
from .kmer import decode_word, validate_k
from .reads import ReadSet

GRAPH_MAGIC = b"BDBG"
GRAPH_VERSION = 1
_GRAPH_HEADER = struct.Struct("<4sBBHQQ")  # magic, version, k, flags, nv, ne

MODES = ("memory", "parallel", "external")


@dataclass(slots=True)
class RunConfig:
    """One build invocation: order, execution mode, resources, paths."""

    k: int
    mode: str = "memory"
    p: int = 1
    ext: ExtConfig | None = None
    inputs: list = field(default_factory=list)
    output: str | None = None
    report: str | None = None

    def __post_init__(self):
        validate_k(self.k)
        if self.mode not in MODES:
            raise ConfigError("mode must be one of %s" % (MODES,))
        if self.p < 1:
            raise ConfigError("worker count must be >= 1")
        named = [p for p in [self.output, self.report] if p is not None]
        named += list(self.inputs)
        if len(named) != len(set(named)):
            raise ConfigError("input, output and report paths must be distinct")


# --- sequence ingestion -------------------------------------------------------


def _open_text(path: str):
    with open(path, "rb") as probe:
        head = probe.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rt")
    return open(path, "rt")


def _ingest_fasta(fh, path, rs):
    lineno = 0
    seq = []
    seen_header = False
    for line in fh:
        lineno += 1
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if seen_header:
                rs.add_sequence("".join(seq))
            seen_header = True
            seq = []
        elif not seen_header:
            raise FormatError("%s: line %d: sequence data before first header" % (path, lineno))
        else:
            seq.append(line.upper())
    if seen_header:
        rs.add_sequence("".join(seq))


def _ingest_fastq(fh, path, rs):
    lineno = 0
    while True:
        group = []
        for _ in range(4):
            line = fh.readline()
            if not line:
                break
            lineno += 1
            group.append(line.rstrip("\n"))
        if not group:
            return
        if len(group) < 4:
            raise FormatError("%s: line %d: truncated record" % (path, lineno))
        hdr, seq, sep, qual = group
        if not hdr.startswith("@"):
            raise FormatError("%s: line %d: expected '@' header" % (path, lineno - 3))
        if not sep.startswith("+"):
            raise FormatError("%s: line %d: expected '+' separator" % (path, lineno - 1))
        if len(qual) != len(seq):
            raise FormatError("%s: line %d: quality length != sequence length" % (path, lineno))
        rs.add_sequence(seq.upper())


def read_sequences(paths) -> ReadSet:
    """Ingest FASTA/FASTQ files, plain or gzipped, into one ReadSet.

    The counters on the result say what happened: sequences_in accepted
    records, fragments_split the extra pieces cut at ambiguity codes.
    """
    rs = ReadSet()
    for path in paths:
        with _open_text(path) as fh:
            first = fh.read(1)
            fh.seek(0)
            try:
                if first == "" or first == ">":
                    _ingest_fasta(fh, path, rs)
                elif first == "@":
                    _ingest_fastq(fh, path, rs)
                else:
                    raise FormatError("%s: line 1: neither FASTA '>' nor FASTQ '@'" % path)
            except InvalidSymbolError as e:
                raise FormatError("%s: %s" % (path, e)) from e
    return rs


# --- GFA ----------------------------------------------------------------------

_ORIENT = ("+", "-")


def _node_labels(g):
    if isinstance(g, LabeledBiGraph):
        return list(g.labels)
    return [decode_word(int(w), g.k) for w in g.vertex_words]


def write_gfa(g, path: str) -> None:
    """GFA v1 dump of a k-mer graph or a compacted labeled graph.

    One S line per node, one L line per bi-directed edge, both in id order;
    the bk header tag carries k so edgeless graphs stay reloadable.
    """
    labels = _node_labels(g)
    ov = "%dM" % (g.k - 1)
    with open(path, "w") as fh:
        fh.write("H\tVN:Z:1.0\tbk:i:%d\n" % g.k)
        for name in labels:
            fh.write("S\t%s\t%s\tLN:i:%d\n" % (name, name, len(name)))
        ne = len(g.edge_uid)
        for e in range(ne):
            fh.write("L\t%s\t%s\t%s\t%s\t%s\tRC:i:%d\n" % (
                labels[int(g.edge_uid[e])], _ORIENT[int(g.edge_o1[e])],
                labels[int(g.edge_vid[e])], _ORIENT[int(g.edge_o2[e])],
                ov, int(g.edge_mult[e])))


def read_gfa(path: str) -> LabeledBiGraph:
    """Parse a GFA file written by write_gfa back into a labeled graph."""
    k = None
    names = []
    seqs = {}
    links = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            tag = cols[0]
            if tag == "H":
                for t in cols[1:]:
                    if t.startswith("bk:i:"):
                        k = int(t[5:])
            elif tag == "S":
                if len(cols) < 3:
                    raise FormatError("%s: line %d: short S line" % (path, lineno))
                name, seq = cols[1], cols[2]
                seqs[name] = name if seq == "*" else seq
                names.append(name)
            elif tag == "L":
                if len(cols) < 6:
                    raise FormatError("%s: line %d: short L line" % (path, lineno))
                mult = 1
                for t in cols[6:]:
                    if t.startswith("RC:i:"):
                        mult = int(t[5:])
                try:
                    o1 = _ORIENT.index(cols[2])
                    o2 = _ORIENT.index(cols[4])
                except ValueError:
                    raise FormatError("%s: line %d: bad orientation" % (path, lineno)) from None
                links.append((cols[1], o1, cols[3], o2, mult))
            # other record types are ignored
    if k is None:
        raise FormatError("%s: missing bk:i header tag" % path)
    labels = sorted(seqs[n] for n in names)
    ids = {lab: i for i, lab in enumerate(labels)}
    uu, vv, a, b, mm = [], [], [], [], []
    for un, o1, vn, o2, mult in links:
        if un not in seqs or vn not in seqs:
            raise FormatError("%s: link references unknown segment" % path)
        u, v = ids[seqs[un]], ids[seqs[vn]]
        if u > v:
            u, v, o1, o2 = v, u, 1 - o2, 1 - o1
        if u == v and o1 == 1 and o2 == 1:
            o1 = o2 = 0
        uu.append(u)
        vv.append(v)
        a.append(o1)
        b.append(o2)
        mm.append(mult)
    order = sorted(range(len(uu)), key=lambda i: (uu[i], vv[i], a[i], b[i]))
    return LabeledBiGraph(
        k, labels,
        np.array([uu[i] for i in order], dtype=np.int64),
        np.array([vv[i] for i in order], dtype=np.int64),
        np.array([a[i] for i in order], dtype=np.uint8),
        np.array([b[i] for i in order], dtype=np.uint8),
        np.array([mm[i] for i in order], dtype=np.uint32),
    )


# --- native binary graph ------------------------------------------------------


def write_graph(g: BiGraph, path: str) -> None:
    """Lossless binary dump: header, vertex word table, edge record table.

    Edge rows reuse the 24-byte spill record layout so the bytes match the
    external-memory pipeline exactly.
    """
    u, v, ori, mult = g.edge_records()
    with open(path, "wb") as fh:
        fh.write(_GRAPH_HEADER.pack(
            GRAPH_MAGIC, GRAPH_VERSION, g.k, 0, g.n_vertices, g.n_edges))
        fh.write(np.ascontiguousarray(g.vertex_words, dtype="<u8").tobytes())
        fh.write(records.pack_columns(u, v, ori, mult).tobytes())


def read_graph(path: str) -> BiGraph:
    with open(path, "rb") as fh:
        head = fh.read(_GRAPH_HEADER.size)
        if len(head) < _GRAPH_HEADER.size:
            raise FormatError("%s: truncated header" % path)
        magic, version, k, _flags, nv, ne = _GRAPH_HEADER.unpack(head)
        if magic != GRAPH_MAGIC:
            raise FormatError("%s: not a graph file" % path)
        if version != GRAPH_VERSION:
            raise FormatError("%s: unsupported version %d" % (path, version))
        vbytes = fh.read(8 * nv)
        ebytes = fh.read(records.RECORD_BYTES * ne)
        if len(vbytes) < 8 * nv or len(ebytes) < records.RECORD_BYTES * ne:
            raise FormatError("%s: truncated body" % path)
    words = np.frombuffer(vbytes, dtype="<u8").astype(np.uint64)
    recs = np.frombuffer(ebytes, dtype=records.RECORD_DTYPE)
    u, v, ori, mult = records.unpack_columns(recs)
    return BiGraph(k, words, u, v, ori, mult)


# --- reports ------------------------------------------------------------------


def _histogram(values) -> str:
    vals, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
    return " ".join("%d:%d" % (int(v), int(c)) for v, c in zip(vals, counts))


def stats_lines(g) -> list:
    """Key/value report: sizes plus degree and multiplicity histograms."""
    labels = _node_labels(g)
    ne = len(g.edge_uid)
    deg = np.zeros(len(labels), dtype=np.int64)
    for e in range(ne):
        u, v = int(g.edge_uid[e]), int(g.edge_vid[e])
        deg[u] += 1
        if v != u:
            deg[v] += 1
    mult = np.asarray(g.edge_mult, dtype=np.int64)
    out = [
        "vertices\t%d" % len(labels),
        "edges\t%d" % ne,
        "label_symbols\t%d" % sum(len(x) for x in labels),
    ]
    if len(labels):
        out.append("degree_hist\t%s" % _histogram(deg))
    if ne:
        out.append("mult_hist\t%s" % _histogram(mult))
    return out

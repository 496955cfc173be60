"""Bi-edge construction from (k+1)-mers.

Every (k+1)-mer z of a read induces one bi-edge between the molecules of its
prefix k-mer x and suffix k-mer y.  Orientations record which strand of each
molecule the traversal uses: o1 = FWD iff x is its molecule's canonical
strand, o2 = FWD iff y is.  Records are stored with u <= v; swapping the
endpoints mirrors the edge, which flips and exchanges the orientations.

The mirror rule makes (u, v, o1, o2) and (v, u, flip o2, flip o1) the same
edge, and a (k+1)-mer and its reverse complement always canonicalize to the
identical record.  A self-loop that comes out (REV, REV) is rewritten
(FWD, FWD), the same edge by the mirror rule applied to u == v; without that
rewrite the two strands of a palindromic-ish window would disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator

from .kmer import Kmer, canonicalize, validate_k, windows


class Orientation(IntEnum):
    FWD = 0
    REV = 1

    def flip(self) -> "Orientation":
        return Orientation(1 - self.value)

    def glyph(self) -> str:
        return ">" if self is Orientation.FWD else "<"


@dataclass(frozen=True, slots=True)
class BiEdge:
    """One canonical bi-edge record: u <= v, orientations as stored."""

    u: Kmer
    v: Kmer
    o1: Orientation
    o2: Orientation
    mult: int = 1

    @property
    def is_self_loop(self) -> bool:
        return self.u == self.v

    def key(self):
        return (self.u.word, self.v.word, self.o1.value, self.o2.value)

    def mirrored(self) -> tuple[Kmer, Kmer, Orientation, Orientation]:
        return (self.v, self.u, self.o2.flip(), self.o1.flip())

    def __str__(self) -> str:
        return "(%s, %s, %s, %s) x%d" % (
            self.u.sequence(), self.v.sequence(),
            self.o1.name, self.o2.name, self.mult,
        )


def make_canonical_edge(z: str | Kmer, mult: int = 1) -> BiEdge:
    """The canonical record for one (k+1)-mer z (k + 1 even, so k is odd)."""
    if isinstance(z, Kmer):
        zk = z
    else:
        from .kmer import encode

        zk = encode(z)
    k = zk.k - 1
    validate_k(k)
    x = Kmer(k, zk.word >> 2)
    y = Kmer(k, zk.word & ((1 << (2 * k)) - 1))
    cx = canonicalize(x)
    cy = canonicalize(y)
    o1 = Orientation.FWD if cx.strand == 0 else Orientation.REV
    o2 = Orientation.FWD if cy.strand == 0 else Orientation.REV
    if cx.kmer.word <= cy.kmer.word:
        u, v = cx.kmer, cy.kmer
    else:
        u, v = cy.kmer, cx.kmer
        o1, o2 = o2.flip(), o1.flip()
    if u == v and o1 is Orientation.REV and o2 is Orientation.REV:
        o1 = o2 = Orientation.FWD
    return BiEdge(u, v, o1, o2, mult)


def iter_read_edges(read: str | bytes, k: int) -> Iterator[BiEdge]:
    """Edges of one read in window order.  Short reads yield nothing."""
    if isinstance(read, bytes):
        read = read.decode("ascii")
    validate_k(k)
    if len(read) < k + 1:
        return
    for z in windows(read, k + 1):
        yield make_canonical_edge(z)


def edges_with_rc(read: str, k: int) -> list[BiEdge]:
    """Records for a read followed by its reverse complement's records.

    The rc half is the fwd half reversed; the explicit double enumeration
    exists as the slow shape the kernels and tests check against.
    """
    fwd = list(iter_read_edges(read, k))
    rc = list(iter_read_edges(reverse_complement_str(read), k))
    return fwd + rc


def reverse_complement_str(read: str) -> str:
    from .kmer import reverse_complement_str as _rcs

    return _rcs(read)


def vertex_molecules(edges) -> set[Kmer]:
    """The canonical k-mers touched by a collection of edges."""
    out: set[Kmer] = set()
    for e in edges:
        out.add(e.u)
        out.add(e.v)
    return out

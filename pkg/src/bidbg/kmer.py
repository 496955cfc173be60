"""k-mer values, 2-bit packing, reverse complement, canonical form.

Symbols pack two bits each (A=00, C=01, G=10, T=11) with the first symbol in
the most significant position, so comparing packed words as integers is the
same as comparing the underlying strings lexicographically.  Any k-mer up to
32 symbols fits one 64-bit word; graph order is restricted to odd k in
[3, 31] so that a (k+1)-mer also fits a single word.  Larger k would need a
fixed-width multi-word code path behind the same interfaces; the record
formats in this package pin the single-word layout, so the ceiling is
enforced rather than widened.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InvalidKError, InvalidSymbolError

ALPHABET = "ACGT"
ALPHABET_SIZE = 4

K_MIN = 3
K_MAX = 31
WORD_SYMBOLS_MAX = 32

_CODE_OF = {"A": 0, "C": 1, "G": 2, "T": 3}
_SYMBOL_OF = "ACGT"
_COMPLEMENT = str.maketrans("ACGT", "TGCA")

_PAIR_MASK = 0x3333333333333333
_NIBBLE_MASK = 0x0F0F0F0F0F0F0F0F
_WORD_MASK = 0xFFFFFFFFFFFFFFFF


class Strand(enum.IntEnum):
    """Which strand of a molecule a k-mer instance lies on."""

    POS = 0
    NEG = 1


def flip_strand(s: Strand) -> Strand:
    return Strand.NEG if s == Strand.POS else Strand.POS


def validate_k(k: int) -> None:
    """Reject graph orders the toolkit cannot run with.

    k must be odd so no k-mer equals its own reverse complement, which keeps
    the canonical strand of every molecule unambiguous.
    """
    if not isinstance(k, int) or k < K_MIN or k > K_MAX:
        raise InvalidKError(
            f"k={k!r} out of range: need an odd k with {K_MIN} <= k <= {K_MAX} "
            f"(single 64-bit word per (k+1)-mer)"
        )
    if k % 2 == 0:
        raise InvalidKError(f"k={k} is even; k must be odd so molecules have no palindromes")


@dataclass(frozen=True, order=True, slots=True)
class Kmer:
    """A packed DNA string of fixed length `k` (1..32 symbols).

    Ordering compares (k, word), so equal-length k-mers order exactly like
    their string forms.
    """

    k: int
    word: int

    def __post_init__(self):
        if not 1 <= self.k <= WORD_SYMBOLS_MAX:
            raise InvalidKError(f"k-mer length {self.k} outside 1..{WORD_SYMBOLS_MAX}")
        if not 0 <= self.word < (1 << (2 * self.k)):
            raise ValueError(f"word {self.word:#x} does not fit {self.k} symbols")

    def __str__(self) -> str:
        return decode_word(self.word, self.k)

    def sequence(self) -> str:
        return decode_word(self.word, self.k)


@dataclass(frozen=True, slots=True)
class CanonicalKmer:
    """A canonical k-mer plus the strand the original instance was on."""

    kmer: Kmer
    strand: Strand


@dataclass(frozen=True, slots=True)
class Molecule:
    """A k-molecule: the pair {x, reverse_complement(x)} named by its canonical member."""

    canonical: Kmer
    complement: Kmer

    @property
    def members(self) -> tuple[Kmer, Kmer]:
        return (self.canonical, self.complement)


def encode_word(seq: str) -> int:
    """Pack an ACGT string into an integer, first symbol in the top bits."""
    word = 0
    for i, ch in enumerate(seq):
        code = _CODE_OF.get(ch)
        if code is None:
            raise InvalidSymbolError(ch, i)
        word = (word << 2) | code
    return word


def decode_word(word: int, k: int) -> str:
    """Inverse of encode_word for a k-symbol word."""
    out = []
    for shift in range((k - 1) * 2, -1, -2):
        out.append(_SYMBOL_OF[(word >> shift) & 3])
    return "".join(out)


def revcomp_word(word: int, k: int) -> int:
    """Reverse complement of a packed word.

    Complement is bitwise NOT of every 2-bit code (A<->T, C<->G); the symbol
    order is then reversed with the usual pair/nibble/byte swap.
    """
    w = ~word & _WORD_MASK
    w = ((w >> 2) & _PAIR_MASK) | ((w & _PAIR_MASK) << 2)
    w = ((w >> 4) & _NIBBLE_MASK) | ((w & _NIBBLE_MASK) << 4)
    w = int.from_bytes(w.to_bytes(8, "little"), "big")
    return w >> (64 - 2 * k)


def encode(seq: str) -> Kmer:
    """Pack a DNA string (1..32 symbols) into a Kmer."""
    if not 1 <= len(seq) <= WORD_SYMBOLS_MAX:
        raise InvalidKError(f"cannot pack {len(seq)} symbols into one word")
    return Kmer(len(seq), encode_word(seq))


def decode(x: Kmer) -> str:
    return decode_word(x.word, x.k)


def reverse_complement(x: Kmer) -> Kmer:
    return Kmer(x.k, revcomp_word(x.word, x.k))


def reverse_complement_str(seq: str) -> str:
    """String-level reverse complement; the oracle for the packed version."""
    return seq.translate(_COMPLEMENT)[::-1]


def canonicalize(x: Kmer) -> CanonicalKmer:
    """Canonical form of x: the lexicographic minimum of {x, revcomp(x)}.

    Returns the canonical k-mer plus the strand x itself sits on (POS when x
    is already canonical).  Requires odd length; with an even length x could
    equal its own reverse complement and the strand would be ambiguous.
    """
    if x.k % 2 == 0:
        raise InvalidKError(f"canonical form needs odd length, got {x.k}")
    rc = reverse_complement(x)
    if x.word <= rc.word:
        return CanonicalKmer(x, Strand.POS)
    return CanonicalKmer(rc, Strand.NEG)


def molecule_of(x: Kmer) -> Molecule:
    """The k-molecule containing x."""
    canon = canonicalize(x)
    return Molecule(canon.kmer, reverse_complement(canon.kmer))


def windows(seq: str, width: int) -> list[Kmer]:
    """All width-mers of seq in left-to-right order; no oddness rule.

    This is the raw sliding window used for both k-mers and (k+1)-mers.  A
    seq shorter than width yields an empty list.
    """
    if not 1 <= width <= WORD_SYMBOLS_MAX:
        raise InvalidKError(f"window width {width} outside 1..{WORD_SYMBOLS_MAX}")
    for i, ch in enumerate(seq):
        if ch not in _CODE_OF:
            raise InvalidSymbolError(ch, i)
    if len(seq) < width:
        return []
    mask = (1 << (2 * width)) - 1
    out = []
    word = encode_word(seq[:width])
    out.append(Kmer(width, word))
    for i in range(width, len(seq)):
        word = ((word << 2) | _CODE_OF[seq[i]]) & mask
        out.append(Kmer(width, word))
    return out


def spectrum(seq: str, k: int) -> list[Kmer]:
    """All k-mers of seq in left-to-right order, k validated as a graph order."""
    validate_k(k)
    return windows(seq, k)

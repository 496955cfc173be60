"""Read container and ingestion rules.

Input sequences are normalized to uppercase ACGT.  Runs of N (or any other
IUPAC ambiguity code) split a sequence into fragments; fragments shorter than
k + 1 contribute no edges and are counted rather than silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

_SPLIT_CODES = frozenset(b"NRYSWKMBDHV")


@dataclass
class ReadSet:
    """Uppercase ACGT fragments ready for edge enumeration."""

    fragments: list[bytes] = field(default_factory=list)
    sequences_in: int = 0
    fragments_split: int = 0
    symbols_in: int = 0
    symbols_kept: int = 0

    def add_sequence(self, seq: str | bytes) -> None:
        if isinstance(seq, str):
            raw = seq.encode("ascii")
        else:
            raw = bytes(seq)
        raw = raw.upper()
        self.sequences_in += 1
        self.symbols_in += len(raw)
        start = None
        pieces = 0
        for i, b in enumerate(raw):
            if b in b"ACGT":
                if start is None:
                    start = i
                continue
            if b not in _SPLIT_CODES:
                from .errors import InvalidSymbolError

                raise InvalidSymbolError(chr(b), i)
            if start is not None:
                self._push(raw[start:i])
                pieces += 1
                start = None
        if start is not None:
            self._push(raw[start:])
            pieces += 1
        if pieces > 1:
            self.fragments_split += pieces - 1

    def _push(self, frag: bytes) -> None:
        self.fragments.append(frag)
        self.symbols_kept += len(frag)

    def extend(self, seqs) -> None:
        for s in seqs:
            self.add_sequence(s)

    def usable_fragments(self, k: int) -> list[bytes]:
        """Fragments long enough to hold at least one (k+1)-mer."""
        return [f for f in self.fragments if len(f) >= k + 1]

    def skipped_fragment_count(self, k: int) -> int:
        return sum(1 for f in self.fragments if len(f) < k + 1)

    @classmethod
    def from_sequences(cls, seqs) -> "ReadSet":
        rs = cls()
        rs.extend(seqs)
        return rs

"""Fixed-width edge record format, in memory and on disk.

A record is 24 bytes: u and v as packed uint64 words, one orientation byte
(bit 7 = o1, bit 6 = o2, bit 0 = self-loop flag), a uint32 multiplicity and
three reserved zero bytes.  Files carry a 16-byte header:

    magic "BDBE" | version u8 | k u8 | flags u16 | record count u64

all little-endian.  The format is what the external-memory passes spill and
merge, so the record size is part of the I/O cost model and must not drift.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError

RECORD_BYTES = 24
HEADER_BYTES = 16
MAGIC = b"BDBE"
VERSION = 1

_HEADER = struct.Struct("<4sBBHQ")

RECORD_DTYPE = np.dtype(
    [
        ("u", "<u8"),
        ("v", "<u8"),
        ("ori", "u1"),
        ("mult", "<u4"),
        ("pad", "u1", (3,)),
    ],
    align=False,
)
assert RECORD_DTYPE.itemsize == RECORD_BYTES


def pack_columns(u, v, ori, mult) -> np.ndarray:
    recs = np.zeros(len(u), dtype=RECORD_DTYPE)
    recs["u"] = u
    recs["v"] = v
    recs["ori"] = ori
    recs["mult"] = mult
    return recs


def unpack_columns(recs: np.ndarray):
    return (
        recs["u"].astype(np.uint64, copy=True),
        recs["v"].astype(np.uint64, copy=True),
        recs["ori"].astype(np.uint8, copy=True),
        recs["mult"].astype(np.uint32, copy=True),
    )


def write_header(fh, k: int, count: int) -> None:
    fh.write(_HEADER.pack(MAGIC, VERSION, k, 0, count))


def read_header(fh):
    """Returns (k, record_count)."""
    raw = fh.read(HEADER_BYTES)
    if len(raw) != HEADER_BYTES:
        raise FormatError("short header: expected %d bytes, got %d" % (HEADER_BYTES, len(raw)))
    magic, version, k, flags, count = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError("bad magic %r" % (magic,))
    if version != VERSION:
        raise FormatError("unsupported record file version %d" % version)
    if flags != 0:
        raise FormatError("unsupported flags 0x%x" % flags)
    return k, count


def write_record_file(path, k: int, u, v, ori, mult) -> int:
    """Writes a complete record file; returns bytes written."""
    recs = pack_columns(u, v, ori, mult)
    with open(path, "wb") as fh:
        write_header(fh, k, len(recs))
        fh.write(recs.tobytes())
    return HEADER_BYTES + len(recs) * RECORD_BYTES


def read_record_file(path):
    """Returns (k, (u, v, ori, mult))."""
    with open(path, "rb") as fh:
        k, count = read_header(fh)
        raw = fh.read(count * RECORD_BYTES)
    if len(raw) != count * RECORD_BYTES:
        raise FormatError("truncated record file: %s" % path)
    recs = np.frombuffer(raw, dtype=RECORD_DTYPE)
    return k, unpack_columns(recs)


def iter_record_blocks(fh, count: int, records_per_block: int):
    """Yields column tuples of at most records_per_block records."""
    remaining = count
    while remaining > 0:
        take = min(remaining, records_per_block)
        raw = fh.read(take * RECORD_BYTES)
        if len(raw) != take * RECORD_BYTES:
            raise FormatError("truncated record block")
        yield unpack_columns(np.frombuffer(raw, dtype=RECORD_DTYPE))
        remaining -= take

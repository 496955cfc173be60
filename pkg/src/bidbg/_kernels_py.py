"""numpy implementations of the hot kernels.

This is the fallback backend behind bidbg.kernels; the compiled backend in
_speedups.pyx mirrors every function here bit for bit.  All functions work on
plain numpy arrays: 2-bit codes as uint8, packed k-mer words as uint64.

Sorting is least-significant-digit radix over the fixed-width key
u(2k bits) | v(2k bits) | o1 o2 (padded to a nibble), 8 bits per pass, so the
pass count is ceil((4k+4)/8) and depends on k only.  Each pass is a stable
counting sort on one key byte.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_PAIR = np.uint64(0x3333333333333333)
_NIBBLE = np.uint64(0x0F0F0F0F0F0F0F0F)

# ori byte layout, shared with the 24-byte record format:
# bit 7 = o1, bit 6 = o2 (0 = FWD, 1 = REV), bit 0 = self-loop flag.
ORI_O1 = 0x80
ORI_O2 = 0x40
ORI_SELF_LOOP = 0x01

_ASCII_CODE = np.full(256, 255, dtype=np.uint8)
for _ch, _code in zip(b"ACGT", range(4)):
    _ASCII_CODE[_ch] = _code


def encode_codes(seq: bytes) -> np.ndarray:
    """ASCII ACGT bytes -> 2-bit codes.  Callers validate the alphabet."""
    return _ASCII_CODE[np.frombuffer(seq, dtype=np.uint8)]


def pack_words(codes: np.ndarray, width: int) -> np.ndarray:
    """Packed words for every length-`width` window of codes.

    Builds windows by doubling partial widths, so the work is
    O(n log width) instead of O(n * width).
    """
    n = codes.shape[0]
    if n < width:
        return np.empty(0, dtype=np.uint64)
    memo = {1: codes.astype(np.uint64)}

    def widen(m: int) -> np.ndarray:
        got = memo.get(m)
        if got is None:
            a = m // 2
            b = m - a
            wa, wb = widen(a), widen(b)
            out = n - m + 1
            got = (wa[:out] << np.uint64(2 * b)) | wb[a:a + out]
            memo[m] = got
        return got

    return widen(width)


def revcomp_words(words: np.ndarray, width: int) -> np.ndarray:
    """Vectorized reverse complement of packed words."""
    w = ~words
    w = ((w >> np.uint64(2)) & _PAIR) | ((w & _PAIR) << np.uint64(2))
    w = ((w >> np.uint64(4)) & _NIBBLE) | ((w & _NIBBLE) << np.uint64(4))
    w = w.byteswap()
    return w >> np.uint64(64 - 2 * width)


def edge_records_for_codes(codes: np.ndarray, k: int):
    """Canonical edge records for one read and its reverse complement.

    Every (k+1)-window of the read yields one record; the reverse-complement
    read contributes the same records in reverse window order (a (k+1)-mer
    and its reverse complement always canonicalize to the same record, which
    test_edgegen pins against the literal two-strand enumeration).  Returns
    (u, v, ori) arrays of length 2 * (len(codes) - k), or empty arrays for a
    read shorter than k + 1.
    """
    n = codes.shape[0]
    if n < k + 1:
        empty = np.empty(0, dtype=np.uint64)
        return empty, empty, np.empty(0, dtype=np.uint8)
    kmask = np.uint64((1 << (2 * k)) - 1)
    z = pack_words(codes, k + 1)
    x = z >> np.uint64(2)
    y = z & kmask
    rx = revcomp_words(x, k)
    ry = revcomp_words(y, k)
    o1 = x > rx
    o2 = y > ry
    xh = np.where(o1, rx, x)
    yh = np.where(o2, ry, y)
    swap = xh > yh
    u = np.where(swap, yh, xh)
    v = np.where(swap, xh, yh)
    so1 = np.where(swap, ~o2, o1)
    so2 = np.where(swap, ~o1, o2)
    loop = u == v
    # a self-loop stored (REV, REV) is the mirror image of (FWD, FWD);
    # normalize so a window and its reverse complement agree.
    drop = loop & so1 & so2
    so1 &= ~drop
    so2 &= ~drop
    ori = (
        so1.astype(np.uint8) << 7
        | so2.astype(np.uint8) << 6
        | loop.astype(np.uint8)
    )
    u = np.concatenate([u, u[::-1]])
    v = np.concatenate([v, v[::-1]])
    ori = np.concatenate([ori, ori[::-1]])
    return u, v, ori


def _sort_bytes_for_k(k: int) -> int:
    return (4 * k + 4 + 7) // 8


def record_sort_keys(u: np.ndarray, v: np.ndarray, ori: np.ndarray, k: int):
    """(lo, hi) words of the packed sort key; hi is None when 4k+4 <= 64."""
    nib = (ori >> np.uint8(4)).astype(np.uint64) & np.uint64(0b1100)
    if 4 * k + 4 <= 64:
        lo = (u << np.uint64(2 * k + 4)) | (v << np.uint64(4)) | nib
        return lo, None
    lo = (u << np.uint64(2 * k + 4)) | (v << np.uint64(4)) | nib if 2 * k + 4 < 64 \
        else (v << np.uint64(4)) | nib
    if 2 * k <= 60:
        hi = u >> np.uint64(60 - 2 * k)
    else:
        hi = (u << np.uint64(2 * k - 60)) | (v >> np.uint64(60))
    return lo, hi


def _lsd_radix(columns, n_bytes_per_column):
    """Stable LSD radix argsort over (hi, lo) column pairs.

    columns are ordered least significant first.  Returns (perm, passes).
    """
    n = columns[0].shape[0]
    perm = np.arange(n, dtype=np.int64)
    passes = 0
    cols = [c.copy() for c in columns]
    for ci, col_bytes in enumerate(n_bytes_per_column):
        for b in range(col_bytes):
            digit = ((cols[ci] >> np.uint64(8 * b)) & np.uint64(0xFF)).astype(np.uint8)
            order = np.argsort(digit, kind="stable")
            for j in range(len(cols)):
                cols[j] = cols[j][order]
            perm = perm[order]
            passes += 1
    return perm, passes


def radix_sort_records(u: np.ndarray, v: np.ndarray, ori: np.ndarray, k: int):
    """Stable ascending sort permutation on (u, v, o1, o2); returns (perm, passes)."""
    lo, hi = record_sort_keys(u, v, ori, k)
    total = _sort_bytes_for_k(k)
    if hi is None:
        return _lsd_radix([lo], [total])
    return _lsd_radix([lo, hi], [8, total - 8])


def radix_sort_words(words: np.ndarray, k: int):
    """Stable ascending sort permutation for bare k-mer words; (perm, passes)."""
    n_bytes = (2 * k + 7) // 8
    return _lsd_radix([words], [n_bytes])


def dedup_sorted_records(u, v, ori, mult):
    """Collapse equal (u, v, o1, o2) runs of a sorted record set.

    Multiplicities are summed with uint32 saturation.  Returns
    (u, v, ori, mult, saturated_run_count).
    """
    n = u.shape[0]
    if n == 0:
        return u, v, ori, mult.astype(np.uint32), 0
    change = (u[1:] != u[:-1]) | (v[1:] != v[:-1]) | (ori[1:] != ori[:-1])
    starts = np.flatnonzero(np.concatenate([[True], change]))
    sums = np.add.reduceat(mult.astype(np.uint64), starts)
    saturated = int(np.count_nonzero(sums > 0xFFFFFFFF))
    mult_out = np.minimum(sums, 0xFFFFFFFF).astype(np.uint32)
    return u[starts], v[starts], ori[starts], mult_out, saturated


def _record_stream(batches, sid):
    okey_mask = np.uint8(ORI_O1 | ORI_O2)
    for batch in batches:
        bu, bv, bori, bmult = batch
        for i in range(bu.shape[0]):
            yield (int(bu[i]), int(bv[i]), int(bori[i] & okey_mask), sid,
                   int(bori[i]), int(bmult[i]))


def merge_record_streams(streams, batch_size=65536):
    """k-way merge of sorted record batch streams into sorted output batches.

    Ties on (u, v, o1, o2) are resolved by stream index, which makes the
    merge stable with respect to run creation order.
    """
    import heapq

    gens = [_record_stream(s, sid) for sid, s in enumerate(streams)]
    out_u, out_v, out_ori, out_mult = [], [], [], []
    for rec in heapq.merge(*gens):
        out_u.append(rec[0])
        out_v.append(rec[1])
        out_ori.append(rec[4])
        out_mult.append(rec[5])
        if len(out_u) >= batch_size:
            yield (np.array(out_u, dtype=np.uint64), np.array(out_v, dtype=np.uint64),
                   np.array(out_ori, dtype=np.uint8), np.array(out_mult, dtype=np.uint32))
            out_u, out_v, out_ori, out_mult = [], [], [], []
    if out_u:
        yield (np.array(out_u, dtype=np.uint64), np.array(out_v, dtype=np.uint64),
               np.array(out_ori, dtype=np.uint8), np.array(out_mult, dtype=np.uint32))

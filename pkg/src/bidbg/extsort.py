"""External sorting and the out-of-core construction pipeline.

Run generation is plain load-sort-spill: exactly M/24 records per run, no
replacement selection, so run boundaries are deterministic.  Merging is
R-way with ties broken by run index; runs slice the input in order and the
in-run sort is stable, so the merged stream is byte-identical to a stable
in-memory sort of the whole input.

The ledger counts logical B-sized block transfers: every physical read or
write of L bytes charges ceil(L/B) blocks.  Readers pull B bytes per call
and one merge holds R reader blocks plus one output batch, which is what the
M >= (R+1)*B configuration rule guarantees.
"""

from __future__ import annotations

import io as _stdio
import os
import shutil
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import kernels, records
from .errors import ConfigError
from .graph import BiGraph
from .reads import ReadSet
from .sortdedup import BuildStats

SPILL_PREFIX = "bidbg-spill-"
ENV_SPILL_DIR = "BIDB_SPILL_DIR"


@dataclass
class ExtConfig:
    """Memory budget M, block size B, merge fan-in R, spill location."""

    M: int
    B: int
    R: int | None = None
    spill_dir: str | None = None

    def __post_init__(self):
        if self.B < records.RECORD_BYTES:
            raise ConfigError(
                "block size %d smaller than one %d-byte record"
                % (self.B, records.RECORD_BYTES)
            )
        if self.R is None:
            self.R = self.M // self.B - 1
        if self.R < 2:
            raise ConfigError("merge fan-in %r < 2; raise M or lower B" % (self.R,))
        if self.M < (self.R + 1) * self.B:
            raise ConfigError(
                "memory %d cannot hold fan-in %d plus output at block size %d"
                % (self.M, self.R, self.B)
            )

    @property
    def run_capacity(self) -> int:
        return max(1, self.M // records.RECORD_BYTES)

    def spill_root(self) -> str:
        return self.spill_dir or os.environ.get(ENV_SPILL_DIR) or tempfile.gettempdir()


@dataclass
class IoLedger:
    """Block-granular I/O accounting for one external operation."""

    block_size: int
    blocks_read: int = 0
    blocks_written: int = 0
    merge_passes: int = 0
    runs_created: int = 0
    records_in: int = 0
    notes: dict = field(default_factory=dict)

    def charge_read(self, nbytes: int) -> None:
        self.blocks_read += -(-nbytes // self.block_size)

    def charge_write(self, nbytes: int) -> None:
        self.blocks_written += -(-nbytes // self.block_size)

    @property
    def blocks_total(self) -> int:
        return self.blocks_read + self.blocks_written


def make_spill_dir(cfg: ExtConfig) -> str:
    return tempfile.mkdtemp(prefix=SPILL_PREFIX, dir=cfg.spill_root())


def clean_spill(root: str | None = None) -> list[str]:
    """Remove leftover spill directories; returns what was removed."""
    root = root or os.environ.get(ENV_SPILL_DIR) or tempfile.gettempdir()
    removed = []
    if not os.path.isdir(root):
        return removed
    for name in sorted(os.listdir(root)):
        if name.startswith(SPILL_PREFIX):
            path = os.path.join(root, name)
            shutil.rmtree(path, ignore_errors=True)
            removed.append(path)
    return removed


def _write_run(dirpath, idx, k, u, v, ori, mult, ledger) -> str:
    path = os.path.join(dirpath, "run-%06d.bdbe" % idx)
    nbytes = records.write_record_file(path, k, u, v, ori, mult)
    ledger.charge_write(nbytes)
    ledger.runs_created += 1
    return path


def _read_run_batches(path, B, ledger):
    per_block = max(1, B // records.RECORD_BYTES)
    with open(path, "rb") as fh:
        head = fh.read(records.HEADER_BYTES)
        ledger.charge_read(len(head))
        _, count = records.read_header(_stdio.BytesIO(head))
        remaining = count
        while remaining > 0:
            take = min(remaining, per_block)
            raw = fh.read(take * records.RECORD_BYTES)
            ledger.charge_read(len(raw))
            yield records.unpack_columns(
                np.frombuffer(raw, dtype=records.RECORD_DTYPE)
            )
            remaining -= take


class _Buffer:
    def __init__(self):
        self.u, self.v, self.ori, self.mult = [], [], [], []
        self.count = 0

    def add(self, u, v, ori, mult):
        self.u.append(u)
        self.v.append(v)
        self.ori.append(ori)
        self.mult.append(mult)
        self.count += len(u)

    def take(self, n):
        """Concatenate, split off the first n records, keep the rest."""
        u = np.concatenate(self.u) if self.u else np.empty(0, np.uint64)
        v = np.concatenate(self.v) if self.v else np.empty(0, np.uint64)
        ori = np.concatenate(self.ori) if self.ori else np.empty(0, np.uint8)
        mult = np.concatenate(self.mult) if self.mult else np.empty(0, np.uint32)
        head = (u[:n], v[:n], ori[:n], mult[:n])
        self.u, self.v, self.ori, self.mult = [u[n:]], [v[n:]], [ori[n:]], [mult[n:]]
        self.count = len(u) - min(n, len(u))
        return head


def _sorted_batch(k, u, v, ori, mult):
    perm, _ = kernels.radix_sort_records(u, v, ori, k)
    return u[perm], v[perm], ori[perm], mult[perm]


def external_sort(batches, k: int, cfg: ExtConfig, ledger: IoLedger | None = None):
    """R-way external sort of 24-byte record batches.

    Returns (generator of sorted batches, ledger).  The generator owns the
    spill directory and removes it when exhausted or closed; interrupting a
    run leaves only files under the bidbg-spill- prefix for clean_spill.
    """
    if ledger is None:
        ledger = IoLedger(cfg.B)
    return _external_sort_gen(batches, k, cfg, ledger), ledger


def _external_sort_gen(batches, k, cfg, ledger):
    cap = cfg.run_capacity
    buf = _Buffer()
    spill_dir = None
    run_paths = []
    next_idx = 0
    try:
        for batch in batches:
            if len(batch[0]) == 0:
                continue
            buf.add(*batch)
            ledger.records_in += len(batch[0])
            # spill cap-sized runs; the remainder waits for more input, so
            # residency is M plus at most one input batch
            while buf.count > cap:
                if spill_dir is None:
                    spill_dir = make_spill_dir(cfg)
                chunk = _sorted_batch(k, *buf.take(cap))
                run_paths.append(_write_run(spill_dir, next_idx, k, *chunk, ledger))
                next_idx += 1
        if not run_paths:
            # everything fit in one run: no spill, no merge pass
            if buf.count == 0:
                return
            ledger.runs_created += 1
            yield _sorted_batch(k, *buf.take(buf.count))
            return
        if buf.count:
            chunk = _sorted_batch(k, *buf.take(buf.count))
            run_paths.append(_write_run(spill_dir, next_idx, k, *chunk, ledger))
            next_idx += 1
        while len(run_paths) > cfg.R:
            # intermediate pass: merge groups of R into longer runs
            ledger.merge_passes += 1
            next_paths = []
            for g in range(0, len(run_paths), cfg.R):
                group = run_paths[g:g + cfg.R]
                streams = [_read_run_batches(p, cfg.B, ledger) for p in group]
                out = _MergeRunWriter(spill_dir, next_idx, k, ledger)
                next_idx += 1
                for mb in kernels.merge_record_streams(
                    streams, batch_size=max(1, cfg.B // records.RECORD_BYTES)
                ):
                    out.add(*mb)
                next_paths.append(out.close())
                for p in group:
                    os.remove(p)
            run_paths = next_paths
        ledger.merge_passes += 1
        streams = [_read_run_batches(p, cfg.B, ledger) for p in run_paths]
        yield from kernels.merge_record_streams(
            streams, batch_size=max(1, cfg.B // records.RECORD_BYTES)
        )
    finally:
        if spill_dir is not None:
            shutil.rmtree(spill_dir, ignore_errors=True)


class _MergeRunWriter:
    """Spills one merged run incrementally, header patched on close."""

    def __init__(self, dirpath, idx, k, ledger):
        self.path = os.path.join(dirpath, "run-%06d.bdbe" % idx)
        self.k = k
        self.ledger = ledger
        self.count = 0
        self.fh = open(self.path, "wb")
        records.write_header(self.fh, k, 0)

    def add(self, u, v, ori, mult):
        raw = records.pack_columns(u, v, ori, mult).tobytes()
        self.fh.write(raw)
        self.ledger.charge_write(len(raw))
        self.count += len(u)

    def close(self) -> str:
        self.fh.seek(0)
        records.write_header(self.fh, self.k, self.count)
        self.fh.close()
        self.ledger.charge_write(records.HEADER_BYTES)
        self.ledger.runs_created += 1
        return self.path


def stream_dedup(batches):
    """Collapse equal (u, v, o1, o2) runs across batch boundaries."""
    carry = None
    for u, v, ori, mult in batches:
        if len(u) == 0:
            continue
        if carry is not None:
            cu, cv, cori, cmult = carry
            u = np.concatenate([cu, u])
            v = np.concatenate([cv, v])
            ori = np.concatenate([cori, ori])
            mult = np.concatenate([cmult.astype(np.uint32), mult])
        du, dv, dori, dmult, _ = kernels.dedup_sorted_records(u, v, ori, mult)
        if len(du) > 1:
            yield du[:-1], dv[:-1], dori[:-1], dmult[:-1]
        carry = (du[-1:], dv[-1:], dori[-1:], dmult[-1:])
    if carry is not None:
        yield carry


def _record_batches_of_reads(reads: ReadSet, k: int, stats: BuildStats | None):
    skipped = 0
    used = 0
    total = 0
    for frag in reads.fragments:
        if len(frag) < k + 1:
            skipped += 1
            continue
        used += 1
        u, v, ori = kernels.edge_records_for_codes(kernels.encode_codes(frag), k)
        total += len(u)
        yield u, v, ori, np.ones(len(u), dtype=np.uint32)
    if stats is not None:
        stats.k = k
        stats.symbols_in += reads.symbols_kept
        stats.fragments_used += used
        stats.fragments_skipped += skipped
        stats.records_enumerated += total


def ooc_biconstruct(reads: ReadSet, k: int, cfg: ExtConfig,
                    stats: BuildStats | None = None):
    """Out-of-core construction; the graph must match build_in_memory exactly.

    Both externally sorted passes (edge records, then endpoint words) share
    one ledger.  The finished BiGraph itself is an in-memory object; the
    ledger speaks only to the sorting work.
    """
    ledger = IoLedger(cfg.B)
    sorted_gen, _ = external_sort(
        _record_batches_of_reads(reads, k, stats), k, cfg, ledger
    )
    out_u, out_v, out_ori, out_mult = [], [], [], []
    for bu, bv, bori, bmult in stream_dedup(sorted_gen):
        out_u.append(bu)
        out_v.append(bv)
        out_ori.append(bori)
        out_mult.append(bmult)
    eu = np.concatenate(out_u) if out_u else np.empty(0, np.uint64)
    ev = np.concatenate(out_v) if out_v else np.empty(0, np.uint64)
    eori = np.concatenate(out_ori) if out_ori else np.empty(0, np.uint8)
    emult = np.concatenate(out_mult) if out_mult else np.empty(0, np.uint32)

    def endpoint_batches():
        step = max(1, cfg.run_capacity // 2)
        for i in range(0, len(eu), step):
            w = np.concatenate([eu[i:i + step], ev[i:i + step]])
            z = np.zeros(len(w), dtype=np.uint64)
            yield w, z, np.zeros(len(w), np.uint8), np.ones(len(w), np.uint32)

    vgen, _ = external_sort(endpoint_batches(), k, cfg, ledger)
    vwords = []
    for bw, _, _, _ in stream_dedup(vgen):
        vwords.append(bw)
    vw = np.concatenate(vwords) if vwords else np.empty(0, np.uint64)

    g = BiGraph(k, vw, eu, ev, eori, emult)
    if stats is not None:
        stats.edges_unique = len(eu)
        stats.vertices = len(vw)
        stats.self_loops = int(np.count_nonzero(eori & 1))
    return g, ledger

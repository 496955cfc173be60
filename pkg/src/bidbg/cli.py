"""Command-line surface.

Exit codes follow the usual convention: 2 for unusable invocations (bad
flags, even k, nonsense resource budgets), 1 for data that cannot be
processed (missing files, malformed records, corrupt graphs), 0 otherwise.
"""

from __future__ import annotations

import argparse
import sys

from . import io as gio
from . import parsim
from .compact import simplify_with_report
from .errors import BidbgError, ConfigError, ContractError, InvalidKError
from .extsort import ExtConfig, clean_spill, ooc_biconstruct
from .parsim import par_biconstruct
from .sortdedup import BuildStats, build_in_memory

_SUFFIX = {"K": 1 << 10, "M": 1 << 20, "G": 1 << 30}


def parse_size(text: str) -> int:
    """Byte count, accepting K/M/G binary suffixes: '4096', '1M', '64K'."""
    t = text.strip().upper()
    try:
        if t and t[-1] in _SUFFIX:
            return int(t[:-1]) * _SUFFIX[t[-1]]
        return int(t)
    except ValueError:
        raise ConfigError("cannot parse size %r" % text) from None


def _load_graph(path: str):
    # native files start with the 4-byte graph magic, GFA is tab-separated text
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == gio.GRAPH_MAGIC:
        return gio.read_graph(path)
    return gio.read_gfa(path)


def _emit(lines, path):
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bidbg")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_build_flags(sp):
        sp.add_argument("-k", type=int, required=True, help="graph order (odd)")
        sp.add_argument("-p", type=int, default=1, help="worker count")
        sp.add_argument("--report", default=None, help="ledger CSV path")

    b = sub.add_parser("build", help="construct the graph from reads")
    add_build_flags(b)
    b.add_argument("--mode", choices=gio.MODES, default="memory")
    b.add_argument("--mem", default="64M", help="external-mode memory budget")
    b.add_argument("--block", default="256K", help="external-mode block size")
    b.add_argument("--fanin", type=int, default=None, help="merge fan-in R")
    b.add_argument("--spill-dir", default=None)
    b.add_argument("-o", dest="output", required=True,
                   help="output graph; .gfa gets GFA, anything else native binary")
    b.add_argument("inputs", nargs="+", help="FASTA/FASTQ files, gzip ok")

    s = sub.add_parser("simplify", help="compact unbranched chains")
    s.add_argument("-o", dest="output", required=True, help="output GFA")
    s.add_argument("--report", default=None)
    s.add_argument("input", help="graph file (native binary or GFA)")

    st = sub.add_parser("stats", help="print graph size and histograms")
    st.add_argument("input")

    cj = sub.add_parser("compare-ja", help="message accounting, both strategies")
    add_build_flags(cj)
    cj.add_argument("inputs", nargs="+")

    cs = sub.add_parser("clean-spill", help="remove leftover spill files")
    cs.add_argument("--spill-dir", default=None)
    return ap


def _make_ext_config(args) -> ExtConfig:
    return ExtConfig(
        M=parse_size(args.mem),
        B=parse_size(args.block),
        R=args.fanin,
        spill_dir=args.spill_dir,
    )


def _cmd_build(args) -> int:
    cfg = gio.RunConfig(
        k=args.k, mode=args.mode, p=args.p,
        ext=_make_ext_config(args) if args.mode == "external" else None,
        inputs=list(args.inputs), output=args.output, report=args.report,
    )
    reads = gio.read_sequences(cfg.inputs)
    stats = BuildStats()
    if cfg.mode == "memory":
        g = build_in_memory(reads, cfg.k, stats)
        report = [
            "mode,n_records,n_vertices,n_edges",
            "memory,%d,%d,%d" % (stats.records_enumerated, g.n_vertices, g.n_edges),
        ]
    elif cfg.mode == "parallel":
        g, ledger = par_biconstruct(reads, cfg.k, cfg.p)
        report = [
            parsim.CSV_HEADER,
            parsim.csv_line("par", cfg.p, parsim.count_symbols(reads),
                            parsim.count_k1mers(reads, cfg.k),
                            ledger.total_messages, 0),
        ]
    else:
        g, ledger = ooc_biconstruct(reads, cfg.k, cfg.ext, stats)
        report = [
            "mode,n_records,M,B,R,runs,passes,blocks_read,blocks_written",
            "external,%d,%d,%d,%d,%d,%d,%d,%d" % (
                stats.records_enumerated, cfg.ext.M, cfg.ext.B, cfg.ext.R,
                ledger.runs_created, ledger.merge_passes,
                ledger.blocks_read, ledger.blocks_written),
        ]
    if cfg.output.endswith(".gfa"):
        gio.write_gfa(g, cfg.output)
    else:
        gio.write_graph(g, cfg.output)
    if cfg.report:
        _emit(report, cfg.report)
    return 0


def _cmd_simplify(args) -> int:
    g = _load_graph(args.input)
    sg, rep = simplify_with_report(g)
    gio.write_gfa(sg, args.output)
    if args.report:
        _emit([
            "chains_reported,%d" % rep.chains_reported,
            "vertices_merged,%d" % rep.vertices_merged,
            "edges_compacted,%d" % rep.edges_compacted,
            "edges_reattached,%d" % rep.edges_reattached,
            "edges_dropped,%d" % rep.edges_dropped,
            "cycles_broken,%d" % rep.cycles_broken,
            "node_reduction,%.6f" % rep.node_reduction,
        ], args.report)
    return 0


def _cmd_stats(args) -> int:
    _emit(gio.stats_lines(_load_graph(args.input)), None)
    return 0


def _cmd_compare_ja(args) -> int:
    reads = gio.read_sequences(list(args.inputs))
    rep = parsim.compare_strategies(reads, args.k, args.p)
    _emit([parsim.CSV_HEADER] + rep.csv_lines(), args.report)
    return 0


def _cmd_clean_spill(args) -> int:
    removed = clean_spill(args.spill_dir)
    sys.stdout.write("removed %d spill entries\n" % len(removed))
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "simplify": _cmd_simplify,
    "stats": _cmd_stats,
    "compare-ja": _cmd_compare_ja,
    "clean-spill": _cmd_clean_spill,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (InvalidKError, ConfigError, ContractError) as e:
        sys.stderr.write("bidbg: usage error: %s\n" % e)
        return 2
    except (BidbgError, OSError) as e:
        sys.stderr.write("bidbg: error: %s\n" % e)
        return 1


if __name__ == "__main__":
    sys.exit(main())

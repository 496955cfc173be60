"""Bi-directed de Bruijn graph construction and simplification.

Build a graph from DNA reads three interchangeable ways (in memory,
partitioned with message accounting, out of core with I/O accounting),
then compact its unbranched chains through a list-ranking transform.
"""

from .compact import (
    Chain,
    ChainRanking,
    LabeledBiGraph,
    SimplifyReport,
    canonicalize_chains,
    find_candidates,
    list_ranking_transform,
    ooc_rank_chains,
    rank_chains,
    segmented_rank_chains,
    simplify,
    simplify_with_report,
)
from .errors import (
    BidbgError,
    ConfigError,
    ContractError,
    FormatError,
    IntegrityError,
    InvalidKError,
    InvalidSymbolError,
    WalkStructureError,
)
from .extsort import ExtConfig, IoLedger, clean_spill, external_sort, ooc_biconstruct
from .graph import BiGraph, Walk, brute_force_build
from .io import (
    RunConfig,
    read_gfa,
    read_graph,
    read_sequences,
    write_gfa,
    write_graph,
)
from .kmer import CanonicalKmer, Kmer, Molecule, Strand, validate_k
from .parsim import (
    ComparisonReport,
    MessageLedger,
    PartitionPlan,
    compare_strategies,
    ja_emulate,
    par_biconstruct,
)
from .reads import ReadSet
from .sortdedup import BuildStats, EdgeList, VertexList, build_in_memory

__version__ = "0.1.0"

__all__ = [
    "BiGraph",
    "BidbgError",
    "BuildStats",
    "CanonicalKmer",
    "Chain",
    "ChainRanking",
    "ComparisonReport",
    "ConfigError",
    "ContractError",
    "EdgeList",
    "ExtConfig",
    "FormatError",
    "IntegrityError",
    "InvalidKError",
    "InvalidSymbolError",
    "IoLedger",
    "Kmer",
    "LabeledBiGraph",
    "MessageLedger",
    "Molecule",
    "PartitionPlan",
    "ReadSet",
    "RunConfig",
    "SimplifyReport",
    "Strand",
    "VertexList",
    "Walk",
    "WalkStructureError",
    "brute_force_build",
    "build_in_memory",
    "canonicalize_chains",
    "clean_spill",
    "compare_strategies",
    "external_sort",
    "find_candidates",
    "ja_emulate",
    "list_ranking_transform",
    "ooc_biconstruct",
    "ooc_rank_chains",
    "par_biconstruct",
    "rank_chains",
    "read_gfa",
    "read_graph",
    "read_sequences",
    "segmented_rank_chains",
    "simplify",
    "simplify_with_report",
    "validate_k",
    "write_gfa",
    "write_graph",
]

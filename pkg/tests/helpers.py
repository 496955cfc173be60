"""Shared fixture builders for the test suite."""

import random

from bidbg.reads import ReadSet

SIX_READS = ["ATGG", "CCAT", "GGAC", "GTTC", "TGGA", "TGGT"]


def random_reads(rng: random.Random, n: int, min_len: int, max_len: int) -> list[str]:
    return [
        "".join(rng.choice("ACGT") for _ in range(rng.randint(min_len, max_len)))
        for _ in range(n)
    ]


def readset(seqs) -> ReadSet:
    return ReadSet.from_sequences(seqs)


def coverage_reads(rng: random.Random, genome_len: int, read_len: int, coverage: float):
    """Reads tiled over one random genome at roughly the asked coverage."""
    genome = "".join(rng.choice("ACGT") for _ in range(genome_len))
    n = max(1, int(coverage * genome_len / read_len))
    out = []
    for _ in range(n):
        start = rng.randint(0, genome_len - read_len)
        out.append(genome[start:start + read_len])
    return out

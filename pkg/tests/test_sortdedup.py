import random

import numpy as np
import pytest

from bidbg.edgegen import iter_read_edges, make_canonical_edge
from bidbg.errors import ContractError, IntegrityError
from bidbg.sortdedup import (
    BuildStats,
    EdgeList,
    build_adjacency,
    build_in_memory,
    collect_vertices,
    dedup_count,
    enumerate_records,
    sort_edges,
)

from helpers import SIX_READS, random_reads, readset


def six_read_edge_list(unique=False):
    el = enumerate_records(readset(SIX_READS), 3)
    el = sort_edges(el)
    return dedup_count(el) if unique else el


def test_sort_is_idempotent_and_a_permutation():
    el = six_read_edge_list()
    once = sort_edges(el)
    twice = sort_edges(once)
    assert once.u.tolist() == twice.u.tolist()
    assert once.ori.tolist() == twice.ori.tolist()
    assert sorted(el.u.tolist()) == sorted(once.u.tolist())
    assert once.is_sorted()


def test_sort_reversed_matches_comparison_sort():
    rng = random.Random(5)
    el = enumerate_records(readset(random_reads(rng, 30, 8, 20)), 5)
    rev = EdgeList(el.k, el.u[::-1].copy(), el.v[::-1].copy(),
                   el.ori[::-1].copy(), el.mult[::-1].copy())
    got = sort_edges(rev)
    keys = sorted(zip(el.u.tolist(), el.v.tolist(), (el.ori >> 6).tolist()))
    assert list(zip(got.u.tolist(), got.v.tolist(), (got.ori >> 6).tolist())) == keys


def test_sort_empty():
    el = sort_edges(EdgeList.empty(3))
    assert len(el) == 0 and el.is_sorted()


def test_dedup_requires_sorted_input():
    el = six_read_edge_list()
    if el.is_sorted():  # force a violation deterministically
        el = EdgeList(el.k, el.u[::-1].copy(), el.v[::-1].copy(),
                      el.ori[::-1].copy(), el.mult[::-1].copy())
    with pytest.raises(ContractError):
        dedup_count(el)


def test_dedup_pair_merge():
    e = make_canonical_edge("ATGG")
    el = sort_edges(EdgeList.from_biedges(3, [e, e]))
    out = dedup_count(el)
    assert len(out) == 1 and out.mult.tolist() == [2] and out.unique


def test_two_read_example_multiplicity_four():
    # ATGG and CCAT are strands of the same window: one record, count 4
    el = enumerate_records(readset(["ATGG", "CCAT"]), 3)
    out = dedup_count(sort_edges(el))
    assert len(out) == 1
    assert out.mult.tolist() == [4]
    only = next(iter(out))
    assert (str(only.u), str(only.v)) == ("ATG", "CCA")
    assert (only.o1.name, only.o2.name) == ("FWD", "REV")


def test_dedup_all_distinct_is_identity():
    rng = random.Random(11)
    el = sort_edges(enumerate_records(readset(random_reads(rng, 20, 6, 18)), 3))
    out = dedup_count(el)
    again = dedup_count(EdgeList(out.k, out.u, out.v, out.ori,
                                 np.ones(len(out), np.uint32)))
    assert again.mult.tolist() == [1] * len(again)
    assert again.u.tolist() == out.u.tolist()


def test_conservation_of_multiplicities():
    stats = BuildStats()
    build_in_memory(readset(SIX_READS), 3, stats)
    assert stats.records_enumerated == 12  # 6 reads x 1 window x 2 strands
    assert stats.edges_unique == 5


def test_collect_vertices_single_edge():
    el = dedup_count(sort_edges(EdgeList.from_biedges(3, [make_canonical_edge("ATGG")])))
    vl = collect_vertices(el)
    assert [str(x) for x in vl] == ["ATG", "CCA"]


def test_collect_vertices_requires_unique():
    with pytest.raises(ContractError):
        collect_vertices(six_read_edge_list(unique=False))


def test_collect_vertices_empty():
    assert len(collect_vertices(dedup_count(sort_edges(EdgeList.empty(3))))) == 0


def test_six_read_vertices():
    vl = collect_vertices(six_read_edge_list(unique=True))
    assert [str(x) for x in vl] == ["AAC", "ACC", "ATG", "CCA", "GAA", "GAC", "GGA"]


def test_adjacency_mirrors_each_edge():
    el = dedup_count(sort_edges(EdgeList.from_biedges(3, [make_canonical_edge("ATGG")])))
    g = build_adjacency(collect_vertices(el), el)
    atg, cca = g.vertex_id("ATG"), g.vertex_id("CCA")
    [h] = g.half_edges(atg)
    assert (h.nbr, h.o1, h.o2) == (cca, 0, 1)  # (CCA, FWD, REV)
    [hm] = g.half_edges(cca)
    assert (hm.nbr, hm.o1, hm.o2) == (atg, 0, 1)  # mirror: (ATG, FWD, REV)


def test_adjacency_dangling_endpoint_rejected():
    el = dedup_count(sort_edges(EdgeList.from_biedges(3, [make_canonical_edge("ATGG")])))
    vl = collect_vertices(el)
    vl.words = vl.words[:1]
    with pytest.raises(IntegrityError):
        build_adjacency(vl, el)


def test_pass_counts_depend_on_k_not_n():
    rng = random.Random(3)
    small, big = BuildStats(), BuildStats()
    build_in_memory(readset(random_reads(rng, 5, 8, 12)), 5, small)
    build_in_memory(readset(random_reads(rng, 200, 8, 30)), 5, big)
    assert small.edge_sort_passes == big.edge_sort_passes == 3  # ceil(24/8)
    assert small.vertex_sort_passes == big.vertex_sort_passes == 2  # ceil(10/8)


def test_enumerate_skips_short_fragments():
    stats = BuildStats()
    el = enumerate_records(readset(["ACGT", "ACG", "AC"]), 3)
    el2 = enumerate_records(readset(["ACGT", "ACG", "AC"]), 3, stats)
    assert len(el) == len(el2) == 2
    assert stats.fragments_used == 1 and stats.fragments_skipped == 2


def test_edge_list_round_trips_through_biedges():
    el = six_read_edge_list(unique=True)
    back = EdgeList.from_biedges(3, list(el))
    assert back.u.tolist() == el.u.tolist()
    assert back.ori.tolist() == el.ori.tolist()
    assert back.mult.tolist() == el.mult.tolist()


def test_windows_per_read_count():
    rng = random.Random(7)
    reads = random_reads(rng, 25, 4, 30)
    stats = BuildStats()
    build_in_memory(readset(reads), 3, stats)
    want = 2 * sum(len(r) - 3 for r in reads if len(r) >= 4)
    assert stats.records_enumerated == want


def test_iter_read_edges_agrees_with_enumerate():
    reads = ["ATGGACCAT"]
    el = enumerate_records(readset(reads), 3)
    fwd_keys = [e.key() for e in iter_read_edges(reads[0], 3)]
    got = [(int(el.u[i]), int(el.v[i]), (int(el.ori[i]) >> 7) & 1, (int(el.ori[i]) >> 6) & 1)
           for i in range(len(fwd_keys))]
    assert got == fwd_keys

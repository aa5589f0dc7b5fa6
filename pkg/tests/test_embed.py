from __future__ import annotations

import random
from math import comb

import pytest
from hypothesis import given, settings

from ordremoval.core import HypergraphError, build_hypergraph, delete_edges, validate_pattern
from ordremoval.embed import (
    OracleTooLarge,
    copies_through_edge,
    count_copies,
    count_copies_bruteforce,
    enumerate_copies,
    find_copy,
    per_edge_counts,
)
from ordremoval.gen import complete, random_binomial

from .conftest import host_and_pattern, random_hypergraph, random_matching

TWO = validate_pattern(4, 2, [[1, 2], [3, 4]])
FIVE = build_hypergraph(5, 2, [[1, 2], [1, 3], [2, 5], [3, 4], [4, 5]])


def test_complete_four_vertices():
    assert list(enumerate_copies(complete(4, 2), TWO)) == [(1, 2, 3, 4)]


def test_five_vertex_host():
    assert list(enumerate_copies(FIVE, TWO)) == [(1, 2, 3, 4), (1, 2, 4, 5), (1, 3, 4, 5)]
    assert count_copies(FIVE, TWO).total == 3
    assert count_copies_bruteforce(FIVE, TWO).total == 3
    assert copies_through_edge(FIVE, TWO, [1, 2]) == 2


def test_single_edge_pattern_counts_edges():
    G = random_binomial(9, 3, "1/3", seed=4)
    H = validate_pattern(3, 3, [[1, 2, 3]])
    assert count_copies(G, H).total == len(G)
    assert set(enumerate_copies(G, H)) == G.edges


@pytest.mark.parametrize(
    "edges", [[[1, 2], [3, 4]], [[1, 3], [2, 4]], [[1, 4], [2, 3]]]
)
def test_complete_host_counts_subsets(edges):
    H = validate_pattern(4, 2, edges)
    assert count_copies(complete(6, 2), H).total == 15
    assert count_copies(complete(11, 2), H).total == comb(11, 4)


def test_empty_host():
    G = build_hypergraph(7, 2, [])
    assert count_copies(G, TWO).total == 0
    assert count_copies_bruteforce(G, TWO).total == 0
    assert find_copy(G, TWO) is None


def test_big_integer_count():
    # ten isolated vertices between the endpoints; the count exceeds 63 bits
    with pytest.warns(Warning):
        H = validate_pattern(12, 2, [[1, 12]])
    n = 2000
    G = build_hypergraph(n, 2, [[1, n]])
    assert count_copies(G, H).total == comb(n - 2, 10)
    assert comb(n - 2, 10) > 2**63


def test_cap_and_truncation():
    K = complete(8, 2)
    full = count_copies(K, TWO)
    assert full.total == comb(8, 4) and not full.truncated
    capped = count_copies(K, TWO, cap=10)
    assert capped.total == 10 and capped.truncated
    exact_cap = count_copies(K, TWO, cap=full.total)
    assert exact_cap.total == full.total and not exact_cap.truncated
    assert len(list(enumerate_copies(K, TWO, cap=5))) == 5


def test_uniformity_mismatch():
    H3 = validate_pattern(3, 3, [[1, 2, 3]])
    with pytest.raises(HypergraphError):
        count_copies(FIVE, H3)
    with pytest.raises(HypergraphError):
        list(enumerate_copies(FIVE, H3))


def test_edge_not_in_host():
    with pytest.raises(HypergraphError):
        copies_through_edge(FIVE, TWO, [1, 5])


def test_disjoint_copy_host():
    H = validate_pattern(6, 3, [[1, 3, 5], [2, 4, 6]])
    G = build_hypergraph(6, 3, H.edges)
    for e in H.edges:
        assert copies_through_edge(G, H, e) == 1


def test_oracle_refuses_large():
    with pytest.raises(OracleTooLarge):
        count_copies_bruteforce(complete(30, 2), validate_pattern(6, 2, [[1, 2], [3, 4], [5, 6]]), bound=1000)


def test_oracle_agreement_sweep():
    rng = random.Random(2024)
    for _ in range(200):
        s = rng.choice([2, 3])
        n = rng.randint(s, 12)
        t = rng.randint(s, min(n, 6))
        H = random_matching(rng, t, s)
        G = random_hypergraph(rng, n, s, rng.choice([0.2, 0.5, 0.8]))
        assert count_copies(G, H).total == count_copies_bruteforce(G, H).total


@settings(max_examples=150, deadline=None)
@given(host_and_pattern())
def test_enumeration_sorted_and_valid(GH):
    G, H = GH
    copies = list(enumerate_copies(G, H))
    assert copies == sorted(set(copies))
    assert len(copies) == count_copies(G, H).total == count_copies_bruteforce(G, H).total


@settings(max_examples=100, deadline=None)
@given(host_and_pattern())
def test_double_counting(GH):
    G, H = GH
    total = count_copies(G, H).total
    assert sum(copies_through_edge(G, H, e) for e in G.edges) == H.m * total
    assert sum(per_edge_counts(G, H).values()) == H.m * total


@settings(max_examples=100, deadline=None)
@given(host_and_pattern())
def test_monotone_under_deletion(GH):
    G, H = GH
    half = G.sorted_edges()[::2]
    assert count_copies(delete_edges(G, half), H).total <= count_copies(G, H).total


def test_parallel_matches_sequential():
    G = random_binomial(30, 2, "3/10", seed=9)
    H = validate_pattern(4, 2, [[1, 3], [2, 4]])
    assert count_copies(G, H, workers=3).total == count_copies(G, H).total


def test_isolated_vertices_counted_per_gap():
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(4, 11)
        t = rng.randint(3, min(n, 7))
        H = random_matching(rng, t, 2)
        G = random_hypergraph(rng, n, 2, 0.5)
        pinned = [copies_through_edge(G, H, e) for e in G.sorted_edges()]
        assert count_copies(G, H).total == count_copies_bruteforce(G, H).total
        assert sum(pinned) == H.m * count_copies(G, H).total

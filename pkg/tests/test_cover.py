"""Edge cover via matching, star reduction, and the full-match pipeline."""

import itertools

import numpy as np
import pytest

from dosematch.cover import (
    CardinalityPenalty,
    build_mirror_graph,
    extract_cover,
    full_match,
    full_match_via_mirror,
    star_reduce,
)
from dosematch.distances import DistanceMatrix
from dosematch.errors import IsolatedVertex
from dosematch.graph import EdgeCover, WeightedGraph, cover_cost
from dosematch.homogeneity import Measure, WeightingScheme, weighted_measure
from dosematch.matching import min_weight_perfect_matching

from conftest import brute_force_min_edge_cover, random_complete_graph


def graph_to_matrix(g: WeightedGraph) -> DistanceMatrix:
    vals = np.full((g.vertex_count, g.vertex_count), np.nan)
    np.fill_diagonal(vals, 0.0)
    for u, v, c in g.edges:
        vals[u, v] = vals[v, u] = c
    return DistanceMatrix(vals)


# Eight-vertex example graph: two stars plus a triangle in the cheap covers.
EIGHT = WeightedGraph(
    8,
    (
        (5, 7, 1.0), (3, 5, 1.5), (3, 6, 2.0), (1, 2, 3.0), (0, 4, 4.0),
        (0, 1, 1.0), (0, 2, 4.0), (4, 5, 3.0),
        (0, 5, 5.0), (1, 5, 5.0), (0, 6, 5.0), (1, 3, 5.0), (6, 7, 5.0),
    ),
)

# Five-vertex example: a cheap triangle {0,1,2} far from a cheap pair {3,4}.
FIVE = WeightedGraph(
    5,
    (
        (0, 1, 0.1), (1, 2, 0.15), (0, 2, 0.2),
        (0, 3, 2.5), (2, 4, 3.5), (2, 3, 4.5), (3, 4, 0.2),
    ),
)


def test_eight_vertex_cover_costs():
    star_cover = EdgeCover(((3, 5), (5, 7), (1, 2), (3, 6), (0, 4)))
    assert cover_cost(EIGHT, star_cover) == 11.5
    fat_cover = EdgeCover(((0, 1), (0, 2), (1, 2), (5, 7), (3, 6), (4, 5)))
    assert cover_cost(EIGHT, fat_cover) == 14.0
    assert star_cover.covers(8) and fat_cover.covers(8)


def test_mirror_graph_structure():
    lam = 0.5
    mirror = build_mirror_graph(FIVE, CardinalityPenalty(lam))
    assert mirror.vertex_count == 10
    costs = mirror.cost_lookup()
    # bridge cost = 2 * cheapest incident cost + 2 * lambda
    mu = {0: 0.1, 1: 0.1, 2: 0.15, 3: 0.2, 4: 0.2}
    for v, m in mu.items():
        assert costs[(v, v + 5)] == pytest.approx(2 * m + 2 * lam, rel=1e-15)
    # original and copy edges both present at the original cost
    assert costs[(0, 1)] == 0.1 and costs[(5, 6)] == 0.1
    assert len(mirror.edges) == 2 * len(FIVE.edges) + 5


def test_five_vertex_mirror_matching_cost():
    mirror = build_mirror_graph(FIVE)
    res = min_weight_perfect_matching(mirror)
    assert res.total_cost == pytest.approx(0.9, rel=1e-12)


def test_five_vertex_full_match():
    pi = full_match(graph_to_matrix(FIVE))
    assert pi.member_sets() == {frozenset({0, 1, 2}), frozenset({3, 4})}
    triple = next(s for s in pi.subclasses if s.size == 3)
    assert triple.reference == 1  # the hub of the cheap star
    suit = weighted_measure(pi, graph_to_matrix(FIVE), WeightingScheme.SUIT, Measure.NU_STAR)
    assert suit == pytest.approx(0.45, rel=1e-12)


def test_extract_cover_drops_copies_and_rewires_bridges():
    mirror = build_mirror_graph(FIVE)
    res = min_weight_perfect_matching(mirror)
    cover = extract_cover(res.matching, FIVE)
    assert cover.covers(5)
    assert all(u < 5 and v < 5 for u, v in cover.edges)
    assert cover.total_cost == cover_cost(FIVE, cover)


def test_star_reduce_properties(rng):
    for _ in range(20):
        n = int(rng.integers(3, 8))
        g = random_complete_graph(rng, n)
        mirror = build_mirror_graph(g)
        cover = extract_cover(min_weight_perfect_matching(mirror).matching, g)
        reduced = star_reduce(cover, g)
        assert reduced.covers(n)
        assert reduced.total_cost <= cover.total_cost
        # every component of the reduced cover is a star: no edge has both
        # endpoints of degree >= 2
        deg = np.zeros(n, dtype=int)
        for u, v in reduced.edges:
            deg[u] += 1
            deg[v] += 1
        assert all(deg[u] == 1 or deg[v] == 1 for u, v in reduced.edges)


def test_full_match_agrees_with_literal_mirror_pipeline(rng):
    for _ in range(30):
        n = int(rng.integers(3, 9))
        g = random_complete_graph(rng, n)
        dm = graph_to_matrix(g)
        for lam in (0.0, 2.0):
            pi_fast = full_match(dm, CardinalityPenalty(lam))
            pi_slow = full_match_via_mirror(g, CardinalityPenalty(lam))
            val_fast = weighted_measure(pi_fast, dm, WeightingScheme.SUIT, Measure.NU_STAR, lam=lam)
            val_slow = weighted_measure(pi_slow, dm, WeightingScheme.SUIT, Measure.NU_STAR, lam=lam)
            assert val_fast == val_slow  # integer costs: exact


def test_full_match_cost_matches_brute_force_cover(rng):
    # at lambda = 0 the optimal penalized star homogeneity equals the
    # minimum edge-cover cost
    for _ in range(20):
        n = int(rng.integers(3, 8))
        g = random_complete_graph(rng, n)
        dm = graph_to_matrix(g)
        pi = full_match(dm)
        val = weighted_measure(pi, dm, WeightingScheme.SUIT, Measure.NU_STAR)
        best, _ = brute_force_min_edge_cover(g)
        assert val == best


def test_mirror_cost_identity(rng):
    # perfect matching cost on the mirror graph equals the optimal
    # lambda-penalized star cover cost plus lambda * n... specifically
    # 2 * (cover cost + lam * sum(m_i - 2)) relative shifts cancel; check the
    # documented identity directly against the cover produced
    for _ in range(10):
        n = int(rng.integers(3, 7))
        g = random_complete_graph(rng, n)
        mirror = build_mirror_graph(g)
        res = min_weight_perfect_matching(mirror)
        best, _ = brute_force_min_edge_cover(g)
        assert res.total_cost == 2.0 * best


def test_isolated_vertex_raises():
    vals = np.full((3, 3), np.nan)
    np.fill_diagonal(vals, 0.0)
    vals[0, 1] = vals[1, 0] = 1.0
    with pytest.raises(IsolatedVertex):
        full_match(DistanceMatrix(vals))
    with pytest.raises(IsolatedVertex):
        build_mirror_graph(WeightedGraph(3, ((0, 1, 1.0),)))


def test_large_lambda_forces_pairs(rng):
    for n in (4, 6, 8):
        g = random_complete_graph(rng, n, low=0, high=10)
        pi = full_match(graph_to_matrix(g), CardinalityPenalty(1000.0))
        assert pi.sizes() == tuple([2] * (n // 2))


def test_cardinality_penalty_validation():
    with pytest.raises(ValueError):
        CardinalityPenalty(-1.0)
    with pytest.raises(ValueError):
        CardinalityPenalty(np.inf)

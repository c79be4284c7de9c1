"""Shared oracles and random-instance generators for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from dosematch.distances import DistanceMatrix
from dosematch.graph import WeightedGraph


def random_complete_graph(rng, n, low=0, high=100, integer=True) -> WeightedGraph:
    """Complete graph with random costs (integer by default, for exact sums)."""
    edges = []
    for u, v in itertools.combinations(range(n), 2):
        c = float(rng.integers(low, high + 1)) if integer else float(rng.uniform(low, high))
        edges.append((u, v, c))
    return WeightedGraph(n, tuple(edges))


def random_metric_matrix(rng, n) -> DistanceMatrix:
    """Distance matrix from random points in the plane (hence metric)."""
    pts = rng.uniform(0.0, 10.0, size=(n, 2))
    vals = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(vals, 0.0)
    return DistanceMatrix(values=vals)


def matrix_to_graph(d: DistanceMatrix) -> WeightedGraph:
    edges = tuple(
        (i, j, float(d.values[i, j]))
        for i, j in itertools.combinations(range(d.n), 2)
        if not np.isnan(d.values[i, j])
    )
    return WeightedGraph(d.n, edges)


def enumerate_perfect_matchings(n):
    """Yield every perfect matching of K_n as a tuple of (u, v) pairs, u < v.

    (n-1)!! matchings; recursion pairs the smallest unmatched vertex.
    """

    def rec(free):
        if not free:
            yield ()
            return
        u = free[0]
        for k in range(1, len(free)):
            v = free[k]
            rest = free[1:k] + free[k + 1 :]
            for tail in rec(rest):
                yield ((u, v),) + tail

    yield from rec(tuple(range(n)))


def brute_force_min_perfect_matching(g: WeightedGraph):
    """Minimum-cost perfect matching by (n-1)!! enumeration. Oracle."""
    cost = {}
    for u, v, c in g.edges:
        cost[(min(u, v), max(u, v))] = c
    best, best_m = np.inf, None
    for m in enumerate_perfect_matchings(g.vertex_count):
        if all(p in cost for p in m):
            total = sum(cost[p] for p in m)
            if total < best:
                best, best_m = total, m
    return best, best_m


def brute_force_min_edge_cover(g: WeightedGraph):
    """Minimum-cost edge cover by enumerating all matchings plus completions.

    For small graphs only: enumerates every subset of at most n edges that
    covers all vertices (a minimal cover never exceeds n - 1 edges, but we
    allow n for safety) and takes the cheapest.
    """
    n = g.vertex_count
    edges = [(min(u, v), max(u, v), c) for u, v, c in g.edges]
    best = np.inf
    best_cover = None
    # a cheapest cover is attained at some minimal cover, which is a star
    # forest with at most n - 1 edges
    for r in range(1, n):
        for combo in itertools.combinations(edges, r):
            covered = set()
            for u, v, _ in combo:
                covered.add(u)
                covered.add(v)
            if len(covered) == n:
                total = sum(c for _, _, c in combo)
                if total < best:
                    best = total
                    best_cover = tuple((u, v) for u, v, _ in combo)
    return best, best_cover


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)

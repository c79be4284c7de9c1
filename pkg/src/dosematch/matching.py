"""Minimum-weight perfect matching and the optimal pair-matching baseline."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._blossom_core import max_weight_matching_arrays
from .distances import DistanceMatrix
from .errors import Infeasible, NoPerfectMatching, OddVertexCount
from .graph import Matching, WeightedGraph, validate_graph
from .subclassification import Subclass, Subclassification

__all__ = ["MatchingResult", "min_weight_perfect_matching", "optimal_pair_match"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchingResult:
    matching: Matching
    total_cost: float
    solver_stats: tuple[int, int]  # (augmentations, blossoms_formed)


def _canonical_edges(g: WeightedGraph) -> list[tuple[int, int, float]]:
    # Sort edges canonically so equal-cost optima are resolved reproducibly.
    return sorted((min(u, v), max(u, v), c) for u, v, c in g.edges)


def min_weight_perfect_matching(g: WeightedGraph) -> MatchingResult:
    """Perfect matching of minimum total cost on a general graph.

    Solved as maximum-weight maximum-cardinality matching on negated costs.
    Deterministic: identical inputs give identical outputs.
    """
    validate_graph(g)
    n = g.vertex_count
    if n % 2 != 0:
        raise OddVertexCount(f"perfect matching impossible on {n} vertices")
    if n == 0:
        return MatchingResult(Matching(()), 0.0, (0, 0))
    edges = _canonical_edges(g)
    if not edges:
        raise NoPerfectMatching("graph has no edges")
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    ew = np.array([e[2] for e in edges], dtype=np.float64)
    partner, naug, nbloss = max_weight_matching_arrays(eu, ev, -ew, n, max_cardinality=True)
    if (partner < 0).any():
        raise NoPerfectMatching("graph admits no perfect matching")
    cost_of = {(u, v): c for u, v, c in edges}
    pairs = sorted((v, int(partner[v])) for v in range(n) if v < partner[v])
    total = float(sum(cost_of[p] for p in pairs))
    return MatchingResult(Matching(tuple(pairs)), total, (naug, nbloss))


def optimal_pair_match(d: DistanceMatrix) -> Subclassification:
    """Divide units into non-overlapping pairs minimizing total distance.

    For an odd number of units a phantom unit with zero-cost edges to every
    real unit is appended; the unit it absorbs is discarded (and logged).
    Forbidden pairs (absent distances) are never matched together.
    """
    n = d.n
    if n < 2:
        raise Infeasible(f"need at least 2 units, got {n}")
    values = d.values
    iu, iv = np.triu_indices(n, 1)
    present = ~np.isnan(values[iu, iv])
    iu, iv, costs = iu[present], iv[present], values[iu, iv][present]
    total_n = n
    if n % 2 != 0:
        # zero-cost edges from every real unit to the phantom vertex n
        pu = np.arange(n, dtype=np.int64)
        iu = np.concatenate([iu, pu])
        iv = np.concatenate([iv, np.full(n, n, dtype=np.int64)])
        costs = np.concatenate([costs, np.zeros(n)])
        total_n = n + 1
    if iu.size == 0:
        raise Infeasible("no admissible pairs")
    partner, _, _ = max_weight_matching_arrays(iu, iv, -costs, total_n, max_cardinality=True)
    if (partner < 0).any():
        raise Infeasible("no admissible pairing covers every unit")
    discarded: tuple[int, ...] = ()
    if total_n > n:
        dropped = int(partner[n])
        discarded = (dropped,)
        logger.warning("odd unit count: unit %d discarded by pair matching", dropped)
    subclasses = tuple(
        Subclass((v, int(partner[v])), reference=v)
        for v in range(n)
        if v < partner[v] and partner[v] < n
    )
    return Subclassification(subclasses, unit_count=n, discarded=discarded)

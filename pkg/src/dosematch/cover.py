"""Minimum-cost edge cover via matching, and the full-match pipeline.

The textbook construction duplicates the graph (G and a copy G'), bridges
each vertex to its copy at cost 2*mu(v) + 2*lambda with mu(v) the cheapest
incident cost, solves a minimum-weight perfect matching on the union, drops
copy edges, rewires bridges to the cheapest real edge, and star-reduces.

``full_match`` uses an equivalent but much lighter formulation: a perfect
matching of the mirror graph costs

    sum_v (2*mu(v) + 2*lambda) - 2 * max_matching(G; w),
    w(u, v) = mu(u) + mu(v) + 2*lambda - c(u, v),

so one (not necessarily perfect) maximum-weight matching on the positive-w
edges of G replaces the 2N-vertex perfect matching. The explicit mirror
construction is kept for small instances and cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._blossom_core import max_weight_matching_arrays
from .distances import DistanceMatrix
from .errors import IsolatedVertex, UnknownEdge
from .graph import EdgeCover, Matching, WeightedGraph, cover_cost, validate_graph
from .matching import min_weight_perfect_matching
from .subclassification import Subclass, Subclassification

__all__ = [
    "CardinalityPenalty",
    "build_mirror_graph",
    "extract_cover",
    "star_reduce",
    "full_match",
    "full_match_via_mirror",
]


@dataclass(frozen=True)
class CardinalityPenalty:
    """Penalty coefficient on sum(|subclass| - 2); 0 = unconstrained full match.

    Infinity is not representable: pair matching is a separate mode.
    """

    lam: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")


def _mu_and_nearest(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex cheapest incident cost and the lowest-indexed argmin neighbor."""
    n = g.vertex_count
    mu = np.full(n, np.inf)
    nearest = np.full(n, -1, dtype=np.int64)
    for u, v, c in sorted((min(u, v), max(u, v), c) for u, v, c in g.edges):
        if c < mu[u] or (c == mu[u] and v < nearest[u]):
            mu[u] = c
            nearest[u] = v
        if c < mu[v] or (c == mu[v] and u < nearest[v]):
            mu[v] = c
            nearest[v] = u
    isolated = np.where(nearest < 0)[0]
    if isolated.size:
        raise IsolatedVertex(f"vertex {int(isolated[0])} has no incident edge; no edge cover exists")
    return mu, nearest


def build_mirror_graph(g: WeightedGraph, penalty: CardinalityPenalty = CardinalityPenalty(0.0)) -> WeightedGraph:
    """G plus an identical copy G' plus bridges (v, v') at cost 2*mu(v) + 2*lambda."""
    validate_graph(g)
    mu, _ = _mu_and_nearest(g)
    n = g.vertex_count
    edges: list[tuple[int, int, float]] = []
    for u, v, c in g.edges:
        edges.append((u, v, c))
    for u, v, c in g.edges:
        edges.append((u + n, v + n, c))
    for v in range(n):
        edges.append((v, v + n, float(2.0 * mu[v] + 2.0 * penalty.lam)))
    return WeightedGraph(2 * n, tuple(edges))


def extract_cover(m: Matching, g: WeightedGraph) -> EdgeCover:
    """Turn a perfect matching of the mirror graph into an edge cover of g.

    Copy-copy edges are dropped; each bridge (v, v') is replaced by the
    cheapest real edge at v (lowest-indexed neighbor on ties).
    """
    n = g.vertex_count
    _, nearest = _mu_and_nearest(g)
    cover: set[tuple[int, int]] = set()
    for a, b in m.edges:
        a, b = (a, b) if a < b else (b, a)
        if b < n:
            cover.add((a, b))
        elif a >= n:
            continue  # edge inside the copy
        else:
            if b != a + n:
                raise UnknownEdge(f"({a}, {b}) is neither a real, copy, nor bridge edge")
            u = int(nearest[a])
            cover.add((min(a, u), max(a, u)))
    edges = tuple(sorted(cover))
    return EdgeCover(edges, total_cost=cover_cost(g, EdgeCover(edges)))


def _star_reduce_pairs(edges: list[tuple[int, int]], n: int) -> list[tuple[int, int]]:
    """Delete, in lexicographic order, every edge whose endpoints both keep degree >= 2.

    Degrees only decrease, so a single ordered pass reaches the fixed point.
    """
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    kept = []
    for u, v in sorted(edges):
        if deg[u] >= 2 and deg[v] >= 2:
            deg[u] -= 1
            deg[v] -= 1
        else:
            kept.append((u, v))
    return kept


def star_reduce(f: EdgeCover, g: WeightedGraph) -> EdgeCover:
    """Reduce a cover to one whose components are all stars, never raising cost."""
    kept = _star_reduce_pairs([(min(u, v), max(u, v)) for u, v in f.edges], g.vertex_count)
    edges = tuple(sorted(kept))
    return EdgeCover(edges, total_cost=cover_cost(g, EdgeCover(edges)))


def _stars_to_subclassification(edges: list[tuple[int, int]], n: int) -> Subclassification:
    """Convert a star-tiled cover into subclasses with the center as reference."""
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    seen = np.zeros(n, dtype=bool)
    subclasses = []
    for start in range(n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj.get(x, ()):
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    stack.append(y)
        comp.sort()
        if len(comp) == 2:
            ref = comp[0]  # reference is inert for pairs; pick the lower index
        else:
            degs = {x: len(adj[x]) for x in comp}
            ref = max(comp, key=lambda x: (degs[x], -x))
        subclasses.append(Subclass(tuple(comp), reference=ref))
    return Subclassification(tuple(subclasses), unit_count=n)


def full_match(
    d: DistanceMatrix, penalty: CardinalityPenalty = CardinalityPenalty(0.0)
) -> Subclassification:
    """Optimal full match: minimizes penalized star homogeneity under
    size-proportional weights over all subclassifications and references.

    Equivalent to mirror graph -> minimum-weight perfect matching ->
    extract_cover -> star_reduce (see module docstring for the reduction).
    """
    n = d.n
    values = d.values
    iu, iv = np.triu_indices(n, 1)
    present = ~np.isnan(values[iu, iv])
    iu, iv = iu[present], iv[present]
    costs = values[iu, iv]

    # mu(v): cheapest incident cost; nearest: its lowest-indexed argmin.
    mu = np.full(n, np.inf)
    nearest = np.full(n, -1, dtype=np.int64)
    for u, v, c in zip(iu, iv, costs):  # iu < iv and lexicographically sorted
        if c < mu[u]:
            mu[u] = c
            nearest[u] = v
        if c < mu[v]:
            mu[v] = c
            nearest[v] = u
    if (nearest < 0).any():
        bad = int(np.where(nearest < 0)[0][0])
        raise IsolatedVertex(f"unit {bad} has no admissible partner")

    w = mu[iu] + mu[iv] + 2.0 * penalty.lam - costs
    keep = w > 0
    if keep.any():
        partner, _, _ = max_weight_matching_arrays(
            iu[keep], iv[keep], w[keep], n, max_cardinality=False
        )
    else:
        partner = np.full(n, -1, dtype=np.int64)

    cover: set[tuple[int, int]] = set()
    for v in range(n):
        p = int(partner[v])
        if p > v:
            cover.add((v, p))
        elif p < 0:
            u = int(nearest[v])
            cover.add((min(v, u), max(v, u)))
    reduced = _star_reduce_pairs(sorted(cover), n)
    return _stars_to_subclassification(reduced, n)


def full_match_via_mirror(
    g: WeightedGraph, penalty: CardinalityPenalty = CardinalityPenalty(0.0)
) -> Subclassification:
    """Literal composition: mirror graph -> perfect matching -> cover -> stars.

    Used on small instances to cross-check the reduced formulation in
    :func:`full_match`.
    """
    mirror = build_mirror_graph(g, penalty)
    result = min_weight_perfect_matching(mirror)
    cover = extract_cover(result.matching, g)
    reduced = star_reduce(cover, g)
    return _stars_to_subclassification(list(reduced.edges), g.vertex_count)

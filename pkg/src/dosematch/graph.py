"""Weighted undirected graph representation shared by the matching solvers.

Graphs are immutable after construction: solvers build derived graphs rather
than mutating inputs, so instances can be shared freely across workers.
Forbidden pairs are represented by edge *absence*, never by infinite cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateEdge,
    IndexOutOfRange,
    NegativeCost,
    SelfLoop,
    UnknownEdge,
)

__all__ = ["WeightedGraph", "Matching", "EdgeCover", "validate_graph", "cover_cost"]


@dataclass(frozen=True)
class WeightedGraph:
    """An undirected graph with nonnegative float edge costs.

    ``edges`` holds ``(u, v, cost)`` triples with ``u != v``; at most one edge
    per unordered pair. Validation is explicit via :func:`validate_graph`.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v), float(c)) for u, v, c in self.edges))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (u, v, cost) as numpy arrays (empty arrays for no edges)."""
        if not self.edges:
            return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                    np.empty(0, dtype=np.float64))
        arr = np.asarray(self.edges, dtype=np.float64)
        return arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2]

    def cost_lookup(self) -> dict[tuple[int, int], float]:
        """Map each unordered pair (min, max) to its cost."""
        return {(min(u, v), max(u, v)): c for u, v, c in self.edges}


@dataclass(frozen=True)
class Matching:
    """A set of pairwise vertex-disjoint edges, stored as vertex pairs."""

    edges: tuple[tuple[int, int], ...]

    def vertices(self) -> set[int]:
        return {v for e in self.edges for v in e}

    def is_perfect(self, vertex_count: int) -> bool:
        verts = [v for e in self.edges for v in e]
        return len(verts) == vertex_count and len(set(verts)) == vertex_count


@dataclass(frozen=True)
class EdgeCover:
    """An edge subset touching every vertex, with its total cost."""

    edges: tuple[tuple[int, int], ...]
    total_cost: float = field(default=0.0)

    def covers(self, vertex_count: int) -> bool:
        return {v for e in self.edges for v in e} == set(range(vertex_count))


def validate_graph(g: WeightedGraph) -> None:
    """Raise if any WeightedGraph invariant is violated; return None when ok.

    Raises
    ------
    SelfLoop, DuplicateEdge, NegativeCost, IndexOutOfRange
        Each message names the offending edge.
    """
    seen: set[tuple[int, int]] = set()
    n = g.vertex_count
    if n < 0:
        raise IndexOutOfRange(f"vertex_count must be nonnegative, got {n}")
    for u, v, c in g.edges:
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        if not (0 <= u < n) or not (0 <= v < n):
            raise IndexOutOfRange(f"edge ({u}, {v}) outside [0, {n})")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge ({u}, {v})")
        seen.add(key)
        if not np.isfinite(c) or c < 0:
            raise NegativeCost(f"edge ({u}, {v}) has invalid cost {c}")


def cover_cost(g: WeightedGraph, f: EdgeCover) -> float:
    """Total cost of the cover's edges, looked up in ``g``.

    Raises UnknownEdge if the cover references a pair absent from ``g``.
    """
    costs = g.cost_lookup()
    total = 0.0
    for u, v in f.edges:
        key = (min(u, v), max(u, v))
        if key not in costs:
            raise UnknownEdge(f"cover edge ({u}, {v}) not present in graph")
        total += costs[key]
    return total

"""Dual graph of the curve tessellation and the visited-set frontier."""

from __future__ import annotations

import heapq
from functools import lru_cache
from collections.abc import Collection

from .sfc_core import HilbertCurve, check_iteration

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class RoutingError(RuntimeError):
    """Raised when no route to the target exists through the allowed vertices."""


class CoverageGraph:
    """Waypoints of a curve as vertices, 4-neighbor cells joined by edges.

    Vertices are curve indices. The graph knows nothing about obstacles.
    """

    def __init__(self, curve: HilbertCurve):
        self.curve = curve
        self.k = curve.k
        n = curve.side
        cells = curve.cells()
        self.cells = tuple(cells)
        adjacency = []
        for x, y in cells:
            nbrs = []
            for dx, dy in _STEPS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < n and 0 <= ny < n:
                    nbrs.append(curve.cell_to_index((nx, ny)))
            adjacency.append(tuple(sorted(nbrs)))
        self.adjacency = tuple(adjacency)

    def __len__(self) -> int:
        return len(self.adjacency)

    def neighbors(self, d: int) -> tuple[int, ...]:
        return self.adjacency[d]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def are_adjacent(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def __repr__(self):
        return f"CoverageGraph(k={self.k}, orientation={self.curve.orientation!r})"


@lru_cache(maxsize=16)
def build_graph(k: int, orientation: str = "identity") -> CoverageGraph:
    """Cached: graphs are immutable, so episodes on the same curve share one."""
    check_iteration(k)
    return CoverageGraph(HilbertCurve(k, orientation))


def frontier(G: CoverageGraph, V: Collection[int]) -> set[int]:
    """Vertices adjacent to ``V`` but not in it. Obstacles are not subtracted."""
    if not V:
        raise ValueError("frontier of an empty visited set is undefined")
    out = set()
    for v in V:
        out.update(G.adjacency[v])
    out.difference_update(V)
    return out


def shortest_route(G: CoverageGraph, allowed: Collection[int], c: int, p: int) -> list[int]:
    """Minimum-hop route from ``c`` to ``p`` whose interior lies in ``allowed``.

    Unit-weight Dijkstra. Among equal-length routes, each vertex is entered
    from its smallest-index predecessor, so the result is deterministic.
    The search stops as soon as ``p`` is settled.
    """
    if c == p:
        return [c]
    if c not in allowed:
        raise RoutingError(f"route start {c} is not an allowed vertex")
    dist = {c: 0}
    pred: dict[int, int] = {}
    heap = [(0, c)]
    settled = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == p:
            break
        if u != c and u not in allowed:
            continue
        nd = du + 1
        for v in G.adjacency[u]:
            if v != p and v not in allowed:
                continue
            dv = dist.get(v)
            if dv is None or nd < dv:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == dv and u < pred[v]:
                pred[v] = u
    if p not in settled:
        raise RoutingError(f"waypoint {p} unreachable from {c} through allowed vertices")
    route = [p]
    while route[-1] != c:
        route.append(pred[route[-1]])
    route.reverse()
    return route


import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bfs_dist, grammar_curve, grid_neighbors, index_adjacency
from sfcover.coverage_graph import RoutingError, build_graph, frontier, shortest_route


def test_build_graph_k1():
    G = build_graph(1)
    assert len(G) == 4
    assert sorted(G.edges()) == [(0, 1), (0, 3), (1, 2), (2, 3)]


@pytest.mark.parametrize("k", range(6))
def test_build_graph_counts_and_degrees(k):
    G = build_graph(k)
    n = 2**k
    assert len(G) == 4**k
    assert len(G.edges()) == 2 * n * (n - 1)
    if k > 0:
        assert {len(G.neighbors(d)) for d in range(len(G))} <= {2, 3, 4}
        assert len(bfs_dist(G.adjacency, 0)) == len(G)
    assert all(d not in G.neighbors(d) for d in range(len(G)))


def test_build_graph_k0():
    G = build_graph(0)
    assert len(G) == 1 and G.edges() == []


def test_build_graph_matches_grammar_adjacency():
    k = 4
    G = build_graph(k)
    oracle = index_adjacency(k, range(4**k))
    assert all(sorted(oracle[d]) == list(G.neighbors(d)) for d in range(4**k))


def test_build_graph_cap():
    with pytest.raises(OverflowError):
        build_graph(16)


def test_frontier_examples():
    assert frontier(build_graph(1), {0}) == {1, 3}
    assert frontier(build_graph(2), set(range(16))) == set()


def test_frontier_walkthrough_k3():
    # V = 0..21 on the iteration-3 curve. 32 is easy to include by mistake:
    # its cell (4,4) touches none of 0..21.
    G = build_graph(3)
    assert frontier(G, set(range(22))) - {22} == {23, 29, 30, 31, 53, 54, 57, 58}
    assert G.curve.index_to_cell(32) == (4, 4)
    cells = {G.curve.index_to_cell(d) for d in range(22)}
    assert not any(c in cells for c in grid_neighbors((4, 4), 8))


def test_frontier_requires_visits():
    with pytest.raises(ValueError):
        frontier(build_graph(1), set())


@st.composite
def visited_sets(draw, max_k=4):
    k = draw(st.integers(1, max_k))
    V = draw(st.sets(st.integers(0, 4**k - 1), min_size=1))
    return k, V


@given(visited_sets())
def test_frontier_properties(kv):
    k, V = kv
    G = build_graph(k)
    A = frontier(G, V)
    assert not A & V
    assert all(any(v in V for v in G.neighbors(a)) for a in A)
    cells = grammar_curve(k)
    where = {c: d for d, c in enumerate(cells)}
    expected = {where[c] for v in V for c in grid_neighbors(cells[v], 2**k)} - V
    assert A == expected


def test_route_examples():
    G = build_graph(3)
    assert shortest_route(G, {4}, 4, 5) == [4, 5]
    assert shortest_route(G, {7}, 7, 7) == [7]


def test_route_walkthrough_20_to_29():
    G = build_graph(3)
    allowed = set(range(22))
    route = shortest_route(G, allowed, 20, 29)
    adj = index_adjacency(3, allowed | {29})
    assert len(route) - 1 == bfs_dist(adj, 20)[29] == 3
    assert route == [20, 19, 18, 29]


def test_route_unreachable():
    G = build_graph(2)
    with pytest.raises(RoutingError):
        shortest_route(G, {0}, 0, 10)


def smallest_pred_route(adj, c, p):
    """Backtrack from p choosing the smallest-index predecessor one hop closer."""
    dist = bfs_dist(adj, c)
    route = [p]
    while route[-1] != c:
        v = route[-1]
        route.append(min(u for u in adj if v in adj[u] and dist.get(u) == dist[v] - 1))
    return route[::-1]


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32), st.floats(0.3, 0.95))
def test_route_matches_bfs_oracle(k, seed, density):
    rng = random.Random(seed)
    G = build_graph(k)
    allowed = {d for d in range(4**k) if rng.random() < density}
    if not allowed:
        return
    c = rng.choice(sorted(allowed))
    reach = bfs_dist(index_adjacency(k, allowed), c)
    targets = sorted(frontier(G, set(reach)) | set(reach))
    p = rng.choice(targets)
    # p is a dead end: routes may only end there
    walk_adj = {u: ([] if u == p else vs) for u, vs in index_adjacency(k, allowed | {p}).items()}
    route = shortest_route(G, allowed, c, p)
    assert route[0] == c and route[-1] == p
    assert len(set(route)) == len(route)
    assert all(G.are_adjacent(a, b) for a, b in zip(route, route[1:]))
    assert all(v in allowed for v in route[:-1])
    if c != p:
        assert len(route) - 1 == bfs_dist(walk_adj, c)[p]
        assert route == smallest_pred_route(walk_adj, c, p)

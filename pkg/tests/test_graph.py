import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import connected_graphs, graphs
from distlll.exceptions import ParameterError, ValidationError
from distlll.generators import (complete_graph, cycle_graph, generate_graph, gnp_capped, grid_graph, path_graph,
                                random_regular, star_graph)
from distlll.graph import (Graph, ball, bfs_distances, component_diameter, components, distance_k_coloring,
                           format_edgelist, greedy_coloring, parse_edgelist, power_graph, ruling_set)
from distlll.runtime import SeedContext


def brute_distances(g):
    inf = float("inf")
    dist = [[0 if i == j else (1 if g.has_edge(i, j) else inf) for j in range(g.n)] for i in range(g.n)]
    for k, i, j in itertools.product(range(g.n), repeat=3):
        if dist[i][k] + dist[k][j] < dist[i][j]:
            dist[i][j] = dist[i][k] + dist[k][j]
    return dist


def test_from_edges_merges_repeats_and_rejects_loops():
    g = Graph.from_edges(3, [(0, 1), (1, 0), (1, 2)])
    assert g.m == 2
    with pytest.raises(ValidationError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValidationError):
        Graph.from_edges(3, [(0, 1), (0, 1)], strict=True)


def test_asymmetric_adjacency_rejected():
    with pytest.raises(ValidationError):
        Graph(2, [[1], []])


def test_path_has_n_minus_one_edges():
    g = generate_graph({"family": "path", "n": 5})
    assert g.m == 4


def test_random_regular_degrees():
    g = random_regular(10, 3, SeedContext(1))
    assert all(g.degree(v) == 3 for v in g.nodes())


def test_random_regular_odd_product_rejected():
    with pytest.raises(ParameterError):
        random_regular(7, 3, SeedContext(1))


@pytest.mark.parametrize("d", [3, 8])
def test_random_regular_large(d):
    g = random_regular(2000, d, SeedContext(5))
    assert all(g.degree(v) == d for v in g.nodes())


def test_random_regular_is_seeded():
    a = random_regular(200, 4, SeedContext(9))
    b = random_regular(200, 4, SeedContext(9))
    assert a.adj == b.adj


def test_small_families():
    assert grid_graph(3, 4).m == 3 * 3 + 2 * 4
    assert cycle_graph(6).max_degree == 2
    assert star_graph(10).max_degree == 10
    assert complete_graph(5).m == 10


def test_gnp_capped_respects_cap():
    g = gnp_capped(300, 0.05, 4, SeedContext(2))
    assert g.max_degree <= 4


def test_edgelist_roundtrip():
    g = grid_graph(3, 3)
    assert parse_edgelist(format_edgelist(g)).adj == g.adj


def test_edgelist_header_mismatch():
    with pytest.raises(ValidationError):
        parse_edgelist("3 2\n0 1\n")


@given(graphs())
def test_bfs_matches_floyd_warshall(g):
    dist = brute_distances(g)
    for v in g.nodes():
        got = bfs_distances(g, v)
        want = {u: int(d) for u, d in enumerate(dist[v]) if d != float("inf")}
        assert got == want


@given(graphs(), st.integers(0, 3))
def test_ball_is_radius_cut(g, r):
    if g.n == 0:
        return
    dist = brute_distances(g)
    assert ball(g, 0, r) == {u for u in g.nodes() if dist[0][u] <= r}


@given(graphs(), st.integers(1, 3))
def test_power_graph_edges(g, k):
    dist = brute_distances(g)
    pk = power_graph(g, k)
    for u in range(g.n):
        for v in range(u + 1, g.n):
            assert pk.has_edge(u, v) == (dist[u][v] <= k)


@given(graphs())
def test_components_partition(g):
    comps = components(g)
    seen = set()
    for c in comps:
        assert not (seen & c)
        seen |= c
    assert seen == set(g.nodes())
    dist = brute_distances(g)
    for c in comps:
        for u in c:
            for v in c:
                assert dist[u][v] != float("inf")


@given(connected_graphs(max_n=14))
def test_component_diameter_exact(g):
    dist = brute_distances(g)
    assert component_diameter(g, range(g.n)) == max(max(row) for row in dist)


@given(graphs())
def test_greedy_coloring_is_proper(g):
    col = greedy_coloring(g)
    assert all(col[u] != col[v] for u, v in g.edges())
    assert max(col, default=-1) <= g.max_degree


@given(graphs(), st.integers(1, 3))
def test_distance_coloring(g, k):
    col = distance_k_coloring(g, k)
    dist = brute_distances(g)
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if dist[u][v] <= k:
                assert col[u] != col[v]


@given(graphs(), st.integers(2, 4))
def test_ruling_set_separation_and_domination(g, alpha):
    rs = ruling_set(g, alpha, alpha - 1)
    dist = brute_distances(g)
    for u in rs:
        for v in rs:
            if u != v:
                assert dist[u][v] >= alpha
    for v in g.nodes():
        assert any(dist[v][r] <= alpha - 1 for r in rs)

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.generators import gen_random_graph
from metric_sparsity.graph import (
    INF,
    WeightedGraph,
    all_pairs_distances,
    ball,
    connected_components,
    distance_matrix,
    greedy_maximal_scattered,
    is_scattered,
    remove_vertices,
    set_diameter,
    set_distance,
    shortest_path_predecessors,
    sssp_distances,
)
from tests.conftest import path_graph


def test_rejects_self_loops_and_duplicates():
    with pytest.raises(ValueError):
        WeightedGraph(vertex_count=2, edges=[(1, 1, 1)])
    with pytest.raises(ValueError):
        WeightedGraph(vertex_count=2, edges=[(1, 2, 1), (2, 1, 3)])
    with pytest.raises(ValueError):
        WeightedGraph(vertex_count=2, edges=[(1, 2, 1)], blocked_edges=[(2, 1)])


def test_rejects_bad_vertices_and_weights():
    with pytest.raises(ValueError):
        WeightedGraph(vertex_count=2, edges=[(1, 3, 1)])
    with pytest.raises(ValueError):
        WeightedGraph(vertex_count=2, edges=[(1, 2, -1)])
    with pytest.raises(ValueError):
        WeightedGraph(vertex_count=2, edges=[(1, 2, math.inf)])


def test_blocked_edges_never_carry_distance():
    G = WeightedGraph(vertex_count=3, edges=[(1, 2, 1)], blocked_edges=[(2, 3)])
    assert sssp_distances(G, [1]) == {1: 0, 2: 1, 3: INF}
    assert list(G.structural_pairs()) == [(1, 2), (2, 3)]
    assert G.edge_weight(2, 3) == INF


def test_sssp_on_unit_path(unit_path):
    assert sssp_distances(unit_path, [1]) == {1: 0, 2: 1, 3: 2, 4: 3, 5: 4}
    assert sssp_distances(unit_path, [1, 5]) == {1: 0, 2: 1, 3: 2, 4: 1, 5: 0}


def test_sssp_restricted(unit_path):
    assert sssp_distances(unit_path, [1], restrict_to=[1, 2, 4]) == {1: 0, 2: 1, 4: INF}
    with pytest.raises(InvalidArgumentError):
        sssp_distances(unit_path, [3], restrict_to=[1, 2])
    with pytest.raises(InvalidArgumentError):
        sssp_distances(unit_path, [])


def test_weak_and_strong_diameter():
    G = path_graph(3)
    assert set_diameter(G, [1, 3], "weak") == 2
    assert set_diameter(G, [1, 3], "strong") == INF
    assert set_diameter(G, [1, 2, 3], "strong") == 2
    with pytest.raises(InvalidArgumentError):
        set_diameter(G, [], "weak")


def test_set_distance_and_ball(unit_path):
    assert set_distance(unit_path, [1], [4, 5]) == 3
    assert set_distance(unit_path, [1], [5], restrict_to=[1, 2, 5]) == INF
    assert set_distance(unit_path, [], [5]) == INF
    assert ball(unit_path, [3], 1) == (2, 3, 4)
    assert ball(unit_path, [1, 5], 0) == (1, 5)


def test_scattered_sets(unit_path):
    assert is_scattered(unit_path, [1, 3, 5], 1)
    assert not is_scattered(unit_path, [1, 3, 5], 2)
    assert greedy_maximal_scattered(unit_path, unit_path.vertices(), 1) == (1, 3, 5)
    assert greedy_maximal_scattered(unit_path, unit_path.vertices(), 0) == (1, 2, 3, 4, 5)
    assert greedy_maximal_scattered(unit_path, [2, 3, 4, 5], 2) == (2, 5)


def test_distance_matrix_stays_exact():
    G = path_graph(3, Fraction(1, 3))
    D = distance_matrix(G, [1], [1, 3])
    assert D.dtype == object
    assert D[0, 1] == Fraction(2, 3)
    D = distance_matrix(path_graph(3), [1], [3])
    assert D.dtype == object
    assert type(D[0, 0]) is int
    assert distance_matrix(path_graph(3, 0.5), [1], [3]).dtype == float


def test_components_and_removal():
    G = WeightedGraph(vertex_count=5, edges=[(4, 5, 1), (1, 2, 1)])
    assert connected_components(G) == [(1, 2), (3,), (4, 5)]
    assert remove_vertices(G, [2, 3]) == {1, 4, 5}


@given(seed=st.integers(0, 10_000), n=st.integers(2, 9))
def test_triangle_inequality(seed, n):
    G = gen_random_graph(n, 0.5, (0.25, 3), seed)
    D = all_pairs_distances(G)
    for u in G.vertices():
        for v in G.vertices():
            for w in G.vertices():
                duv = D[u].get(v, INF)
                assert duv <= D[u].get(w, INF) + D[w].get(v, INF)


@given(seed=st.integers(0, 10_000), n=st.integers(1, 10), r=st.sampled_from([0, 0.5, 1, 2]))
def test_greedy_scattered_is_maximal(seed, n, r):
    G = gen_random_graph(n, 0.4, (0.25, 2), seed)
    chosen = greedy_maximal_scattered(G, G.vertices(), r)
    assert is_scattered(G, chosen, r)
    D = all_pairs_distances(G)
    for v in G.vertices():
        assert any(D[v].get(c, INF) <= r for c in chosen)


def test_shortest_path_predecessors_keep_every_tie():
    square = WeightedGraph(vertex_count=4, edges=[(1, 2, 1), (1, 3, 1), (2, 4, 1), (3, 4, 1)])
    dist, pred = shortest_path_predecessors(square, [1])
    assert dist == {1: 0, 2: 1, 3: 1, 4: 2}
    assert sorted(pred[4]) == [2, 3]
    assert pred[1] == []
    dist, pred = shortest_path_predecessors(path_graph(5), [1, 4])
    assert dist == {1: 0, 2: 1, 3: 1, 4: 0, 5: 1}
    assert list(dist)[:2] in ([1, 4], [4, 1])
    assert pred[1] == pred[4] == []
    assert pred[3] == [4]
    assert shortest_path_predecessors(path_graph(5), [3], allowed={1, 2, 3})[0] == {3: 0, 2: 1, 1: 2}

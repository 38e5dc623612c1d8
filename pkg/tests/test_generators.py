import pytest
from hypothesis import given
from hypothesis import strategies as st

from metric_sparsity.decompositions import validate_tree_decomposition
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.generators import (
    WEIGHT_GRID,
    gen_clustering_instance,
    gen_grid,
    gen_partial_ktree,
    gen_random_graph,
    gen_star_of_stars,
)


def test_grid_shape_and_weights():
    G = gen_grid(6, 6, (1, 10), 3)
    assert G.vertex_count == 36
    assert len(G.edges) == 60
    assert all(1 <= w <= 10 and (w * WEIGHT_GRID).is_integer() for _, _, w in G.edges)
    assert gen_grid(6, 6, (1, 10), 3).edges == G.edges


def test_unit_grid_has_integer_weights():
    G = gen_grid(2, 3)
    assert {w for _, _, w in G.edges} == {1}
    assert isinstance(G.edges[0][2], int)


def test_star_of_stars():
    G = gen_star_of_stars(3, 2)
    assert G.vertex_count == 10
    assert len(G.edges) == 9
    assert G.neighbors(1) == [2, 5, 8]


def test_small_partial_tree():
    G, td = gen_partial_ktree(5, 1, 1, (1, 1), 7)
    assert len(G.edges) == 4
    assert td.width == 1
    assert validate_tree_decomposition(G, td).valid


@given(seed=st.integers(0, 10_000), n=st.integers(4, 25), k=st.integers(1, 3),
       keep=st.sampled_from([0.5, 0.8, 1.0]))
def test_partial_ktree_decomposition_is_valid(seed, n, k, keep):
    G, td = gen_partial_ktree(n, k, keep, (1, 4), seed)
    report = validate_tree_decomposition(G, td)
    assert report.valid
    assert report.width == k


def test_random_graph_extremes():
    assert gen_random_graph(5, 0, (1, 1), 0).edges == []
    assert len(gen_random_graph(5, 1, (1, 1), 0).edges) == 10


def test_clustering_instance_facilities():
    G = gen_grid(3, 3)
    inst = gen_clustering_instance(G, 2, 11, facilities=4)
    assert len(inst.facilities) == 4
    assert inst.facilities == sorted(set(inst.facilities))
    assert inst.clients == list(range(1, 10))
    assert gen_clustering_instance(G, 2, 11, facilities=4).facilities == inst.facilities
    assert gen_clustering_instance(G, 2, 11).facilities == inst.clients


def test_generator_argument_checks():
    with pytest.raises(InvalidArgumentError):
        gen_partial_ktree(2, 2, 1, (1, 1), 0)
    with pytest.raises(InvalidArgumentError):
        gen_partial_ktree(5, 1, 0, (1, 1), 0)
    with pytest.raises(InvalidArgumentError):
        gen_grid(2, 2, (2, 1))
    with pytest.raises(InvalidArgumentError):
        gen_grid(2, 2, (0.1, 0.105))
    with pytest.raises(InvalidArgumentError):
        gen_star_of_stars(0, 3)
    with pytest.raises(InvalidArgumentError):
        gen_random_graph(3, 1.5, (1, 1), 0)

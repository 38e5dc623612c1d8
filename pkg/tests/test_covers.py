import pytest
from hypothesis import given
from hypothesis import strategies as st

from metric_sparsity.covers import flat_scattered, flatness, sparse_cover, verify_cover
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.generators import gen_partial_ktree, gen_star_of_stars
from metric_sparsity.graph import WeightedGraph, is_scattered, remove_vertices, set_distance
from metric_sparsity.wcol import OrderedPartition, partition_from_tree_decomposition
from tests.conftest import path_graph


def singletons(order):
    return OrderedPartition(parts=[[v] for v in order])


# === SPARSE COVERS ===

def test_cover_of_a_short_path():
    G = path_graph(3)
    cover = sparse_cover(G, singletons([1, 2, 3]), 1, 0)
    assert cover.sets == [[1, 2, 3], [2, 3], [3]]
    assert cover.overlap == 3
    assert cover.wcol_2r == 3
    assert cover.diameter_blowup == 2
    assert cover.blowup_bound == 4
    report = verify_cover(G, cover)
    assert report.covered and report.blowup_ok and report.overlap_ok


def test_cover_rejects_wide_parts():
    G = path_graph(3)
    with pytest.raises(InvalidArgumentError, match="part 0"):
        sparse_cover(G, OrderedPartition(parts=[[1, 3], [2]]), 1, 1)
    with pytest.raises(InvalidArgumentError):
        sparse_cover(G, singletons([1, 2, 3]), 0, 1)


def test_verify_cover_finds_uncovered_vertex():
    G = path_graph(3)
    cover = sparse_cover(G, singletons([1, 2, 3]), 1, 0)
    broken = cover.model_copy(update={"sets": [[1, 2], [2, 3], [3]]})
    report = verify_cover(G, broken)
    assert not report.covered
    assert report.uncovered_vertex == 2


@given(seed=st.integers(0, 10_000), k=st.integers(1, 3), r=st.sampled_from([1, 2, 3]))
def test_cover_guarantees_on_partial_ktrees(seed, k, r):
    G, td = gen_partial_ktree(14, k, 0.8, (1, 4), seed)
    rho = 1
    cover = sparse_cover(G, partition_from_tree_decomposition(G, td, rho), r, rho)
    report = verify_cover(G, cover)
    assert report.covered
    assert report.overlap_ok
    assert report.blowup_ok


# === FLATNESS ===

def isolated(n):
    return WeightedGraph(vertex_count=n)


def test_flatness_keeps_everything_when_nothing_is_shared():
    result = flatness(isolated(3), 1, singletons([1, 2, 3]), 1, [0, 1, 2])
    assert result.S == []
    assert result.B == [0, 1, 2]
    assert result.c == 1
    assert result.guarantees == "empirical"
    assert all(result.verification.values())


def test_flatness_first_loop_fires_on_low_threshold():
    result = flatness(isolated(3), 1, singletons([1, 2, 3]), 2, [0, 1, 2])
    assert result.S == [0]
    assert result.B == []
    assert result.first_loop_iterations == 1
    assert not result.verification["b_size_ok"]


def test_flatness_with_m_zero_skips_removal():
    G = path_graph(4)
    result = flatness(G, 1, singletons([1, 2, 3, 4]), 0, [0, 1, 2, 3])
    assert result.S == []
    assert result.guarantees == "proved"
    assert result.B == [0, 2]


def test_flatness_removes_the_hub():
    # star center first: every leaf weakly reaches it
    G = WeightedGraph(vertex_count=9, edges=[(1, v, 1) for v in range(2, 10)])
    result = flatness(G, 2, singletons(range(1, 10)), 1, list(range(1, 9)))
    assert result.S == [0]
    assert result.B == list(range(1, 9))
    assert all(result.verification.values())


def test_flatness_argument_checks():
    P = singletons([1, 2, 3])
    with pytest.raises(InvalidArgumentError):
        flatness(path_graph(3), 0, P, 1, [0])
    with pytest.raises(InvalidArgumentError):
        flatness(path_graph(3), 1, P, 1, [5])
    with pytest.raises(InvalidArgumentError):
        flatness(path_graph(3), 1, P, 1, [0], c=1)


@pytest.mark.parametrize("m,branches,leaves", [(1, 8, 8), (2, 16, 32)])
def test_flatness_proved_regime_on_star_of_stars(m, branches, leaves):
    G = gen_star_of_stars(branches, leaves)
    hubs = {1} | {2 + b * (leaves + 1) for b in range(branches)}
    A = [v - 1 for v in G.vertices() if v not in hubs]
    result = flatness(G, 1, singletons(G.vertices()), m, A)
    assert result.c == 2
    assert result.guarantees == "proved"
    assert all(result.verification.values())
    assert len(result.B) == branches


@given(seed=st.integers(0, 10_000), m=st.integers(1, 3))
def test_flatness_survivors_are_far_apart(seed, m):
    G, td = gen_partial_ktree(14, 2, 0.8, (1, 3), seed)
    P = partition_from_tree_decomposition(G, td, 1)
    r = 2
    result = flatness(G, r, P, m, list(range(len(P.parts))))
    assert result.verification["s_size_ok"]
    assert result.verification["b_wreach_disjoint"]
    assert result.verification["b_scattered"]
    allowed = remove_vertices(G, [v for part in result.S_sets for v in part])
    for i, a in enumerate(result.B_sets):
        for b in result.B_sets[i + 1:]:
            assert set_distance(G, a, b, restrict_to=allowed) > r


# === FLATNESS ON VERTICES ===

def test_flat_scattered_on_a_path():
    G = path_graph(10)
    result = flat_scattered(G, 3, 3, 2, 1, [1, 4, 7, 10])
    assert result.verification["s_strong_diameter_ok"]
    assert result.verification["b_scattered"]
    assert set(result.B) <= {1, 4, 7, 10}
    gone = {v for part in result.S for v in part}
    assert is_scattered(G, result.B, 3, restrict_to=[v for v in G.vertices() if v not in gone])


def test_flat_scattered_preconditions():
    G = path_graph(10)
    with pytest.raises(InvalidArgumentError):
        flat_scattered(G, 3, 2, 2, 1, [1, 4])
    with pytest.raises(InvalidArgumentError):
        flat_scattered(G, 3, 3, 2, 1, [1, 2])

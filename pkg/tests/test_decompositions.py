from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metric_sparsity.decompositions import (
    BufferedCopDecomposition,
    Supernode,
    TreeDecomposition,
    heuristic_cop_decomposition,
    measure_cop_decomposition,
    shortest_path_tree,
    structure_problems,
    supernode_radius_ok,
    validate_buffered_cop_decomposition,
    validate_tree_decomposition,
)
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.generators import gen_grid
from metric_sparsity.graph import WeightedGraph
from tests.conftest import path_graph


def kinds(report):
    return [v.kind for v in report.violations]


# === TREE DECOMPOSITIONS ===

def test_path_decomposition_is_valid():
    report = validate_tree_decomposition(path_graph(3), TreeDecomposition(bags={0: [1, 2], 1: [2, 3]}, edges=[(0, 1)]))
    assert report.valid
    assert report.width == 1


def test_uncovered_edge():
    report = validate_tree_decomposition(path_graph(3), TreeDecomposition(bags={0: [1, 2], 1: [3]}, edges=[(0, 1)]))
    assert not report.valid
    assert kinds(report) == ["edge_uncovered"]
    assert report.violations[0].witness == {"edge": [2, 3]}


def test_blocked_edges_must_be_covered():
    G = WeightedGraph(vertex_count=3, edges=[(1, 2, 1), (2, 3, 1)], blocked_edges=[(1, 3)])
    report = validate_tree_decomposition(G, TreeDecomposition(bags={0: [1, 2], 1: [2, 3]}, edges=[(0, 1)]))
    assert kinds(report) == ["edge_uncovered"]


def test_disconnected_occurrences_and_missing_vertices():
    td = TreeDecomposition(bags={0: [1, 2], 1: [2, 3], 2: [1]}, edges=[(0, 1), (1, 2)])
    assert "vertex_disconnected" in kinds(validate_tree_decomposition(path_graph(3), td))
    td = TreeDecomposition(bags={0: [1, 2]}, edges=[])
    assert "vertex_missing" in kinds(validate_tree_decomposition(path_graph(3), td))


def test_bag_graph_must_be_a_tree():
    td = TreeDecomposition(bags={0: [1, 2], 1: [2, 3], 2: [3]}, edges=[(0, 1), (1, 2), (2, 0)])
    assert kinds(validate_tree_decomposition(path_graph(3), td)) == ["structure"]
    td = TreeDecomposition(bags={0: [1, 2], 1: [2, 3]}, edges=[(0, 5)])
    assert kinds(validate_tree_decomposition(path_graph(3), td)) == ["structure"]


# === BUFFERED COP DECOMPOSITIONS ===

def single_supernode_path():
    return BufferedCopDecomposition(supernodes=[
        Supernode(id=1, root=1, vertices=[1, 2, 3, 4, 5], skeleton=[(1, 2), (2, 3), (3, 4), (4, 5)])
    ])


def three_level_path():
    return BufferedCopDecomposition(supernodes=[
        Supernode(id=1, root=1, vertices=[1]),
        Supernode(id=2, parent=1, root=2, vertices=[2]),
        Supernode(id=3, parent=2, root=3, vertices=[3, 4, 5], skeleton=[(3, 4), (4, 5)]),
    ])


def test_single_supernode_is_valid(unit_path):
    report = validate_buffered_cop_decomposition(unit_path, single_supernode_path(), 1, 1, 1)
    assert report.valid
    assert all(report.properties.values())


def test_tree_decomposition_property_counts_adjacent_ancestors(unit_path):
    bcd = BufferedCopDecomposition(supernodes=[
        Supernode(id=1, root=1, vertices=[1, 2], skeleton=[(1, 2)]),
        Supernode(id=2, parent=1, root=3, vertices=[3, 4, 5], skeleton=[(3, 4), (4, 5)]),
    ])
    assert validate_buffered_cop_decomposition(unit_path, bcd, 1, 1, 2).valid
    report = validate_buffered_cop_decomposition(unit_path, bcd, 1, 1, 1)
    assert not report.properties["tree_decomposition"]
    assert report.properties["buffer"]


def test_buffer_to_non_adjacent_ancestor(unit_path):
    bcd = three_level_path()
    report = validate_buffered_cop_decomposition(unit_path, bcd, 1, 2, 2)
    assert not report.properties["buffer"]
    assert report.violations[0].witness == {"supernode": 3, "ancestor": 1, "distance": 2}
    assert validate_buffered_cop_decomposition(unit_path, bcd, 1, Fraction(3, 2), 2).valid


def test_radius_violation(unit_path):
    bcd = BufferedCopDecomposition(supernodes=[Supernode(id=1, root=1, vertices=[1, 2, 3, 4, 5])])
    report = validate_buffered_cop_decomposition(unit_path, bcd, 3, 1, 1)
    assert not report.properties["radius"]
    assert report.properties["skeleton"]


def test_measure_three_level_path(unit_path):
    achieved = measure_cop_decomposition(unit_path, three_level_path())
    assert achieved.delta == 0
    assert achieved.gamma == 1
    assert achieved.w == 2


def test_structure_problems(unit_path):
    bcd = BufferedCopDecomposition(supernodes=[
        Supernode(id=1, root=1, vertices=[1, 2, 3]),
        Supernode(id=2, parent=1, root=3, vertices=[3, 4], skeleton=[(3, 5)]),
    ])
    messages = [p.message for p in structure_problems(unit_path, bcd)]
    assert any("lies in supernodes 1 and 2" in m for m in messages)
    assert any("is not an edge" in m for m in messages)
    assert any("belong to no supernode" in m for m in messages)
    report = validate_buffered_cop_decomposition(unit_path, bcd, 1, 1, 1)
    assert not report.valid
    assert not any(report.properties.values())


def test_unknown_parent_is_a_structure_problem(unit_path):
    bcd = BufferedCopDecomposition(supernodes=[Supernode(id=1, parent=7, root=1, vertices=[1, 2, 3, 4, 5])])
    assert structure_problems(unit_path, bcd)[0].kind == "structure"


def test_validator_rejects_bad_parameters(unit_path):
    with pytest.raises(InvalidArgumentError):
        validate_buffered_cop_decomposition(unit_path, single_supernode_path(), 0, 1, 1)
    with pytest.raises(InvalidArgumentError):
        validate_buffered_cop_decomposition(unit_path, single_supernode_path(), 1, 1, 0)


def test_heuristic_on_disconnected_graph():
    G = WeightedGraph(vertex_count=4, edges=[(1, 2, 1), (3, 4, 1)])
    bcd, achieved = heuristic_cop_decomposition(G, 1, 3)
    assert [s.vertices for s in bcd.supernodes] == [[1, 2], [3, 4]]
    assert all(s.parent == 0 for s in bcd.supernodes)
    assert validate_buffered_cop_decomposition(G, bcd, 1, 1, 2).valid
    assert achieved.delta == 1


def test_heuristic_rejects_bad_parameters(unit_path):
    with pytest.raises(InvalidArgumentError):
        heuristic_cop_decomposition(unit_path, 0, 3)
    with pytest.raises(InvalidArgumentError):
        heuristic_cop_decomposition(unit_path, 1, 1)


@given(seed=st.integers(0, 10_000), rows=st.integers(1, 5), cols=st.integers(1, 5),
       delta=st.sampled_from([Fraction(1, 2), 1, 2]))
def test_heuristic_meets_radius_and_skeleton(seed, rows, cols, delta):
    G = gen_grid(rows, cols, (1, 3), seed)
    bcd, _ = heuristic_cop_decomposition(G, delta, 5)
    assert structure_problems(G, bcd) == []
    assert supernode_radius_ok(G, bcd, delta)
    report = validate_buffered_cop_decomposition(G, bcd, delta, Fraction(1, 128), 100)
    assert report.properties["radius"]
    assert report.properties["skeleton"]


def test_shortest_path_tree_prefers_smaller_predecessors():
    square = WeightedGraph(vertex_count=4, edges=[(1, 2, 1), (1, 3, 1), (2, 4, 1), (3, 4, 1)])
    dist, pred = shortest_path_tree(square, 1, {1, 2, 3, 4})
    assert dist == {1: 0, 2: 1, 3: 1, 4: 2}
    assert pred == {1: None, 2: 1, 3: 1, 4: 2}
    zero = WeightedGraph(vertex_count=3, edges=[(1, 2, 0), (2, 3, 1), (1, 3, 1)])
    assert shortest_path_tree(zero, 1, {1, 2, 3})[1] == {1: None, 2: 1, 3: 1}


# === SINGLE-PROPERTY MUTATIONS ===

def three_supernode_chain():
    """Unit path 1..9 plus the chord 7-9, split into three supernodes of three vertices."""
    G = WeightedGraph(vertex_count=9, edges=[(v, v + 1, 1) for v in range(1, 9)] + [(7, 9, 1)])
    bcd = BufferedCopDecomposition(supernodes=[
        Supernode(id=1, root=1, vertices=[1, 2, 3], skeleton=[(1, 2)]),
        Supernode(id=2, parent=1, root=4, vertices=[4, 5, 6], skeleton=[(4, 5)]),
        Supernode(id=3, parent=2, root=7, vertices=[7, 8, 9], skeleton=[(7, 8)]),
    ])
    return G, bcd


CHAIN_PARAMETERS = (1, 2, 2)  # delta, gamma, w

MUTATIONS = [
    ("move", (3, 3)), ("move", (6, 1)), ("move", (9, 1)), ("move", (9, 2)),
    ("delta", Fraction(1, 2)), ("delta", Fraction(3, 4)),
    ("gamma", 4), ("gamma", Fraction(9, 2)), ("gamma", 6),
    ("reroot", 1), ("reroot", 2), ("reroot", 3),
    ("detour", 3),
    ("regraft", 3),
    ("width", 1),
]


def mutate(bcd, mutation):
    """Returns the mutated decomposition, the (delta, gamma, w) to check and the property that must fail."""
    kind, arg = mutation
    bcd = bcd.model_copy(deep=True)
    nodes = bcd.by_id()
    delta, gamma, w = CHAIN_PARAMETERS
    if kind == "move":
        v, target = arg
        next(s for s in bcd.supernodes if v in s.vertices).vertices.remove(v)
        nodes[target].vertices = sorted(nodes[target].vertices + [v])
        return bcd, (delta, gamma, w), "radius"
    if kind == "delta":
        return bcd, (arg, gamma, w), "radius"
    if kind == "gamma":
        return bcd, (delta, arg, w), "buffer"
    if kind == "reroot":
        # the root leaves the skeleton tree
        s = nodes[arg]
        s.root = next(v for v in s.vertices if v not in s.skeleton_vertices())
        return bcd, (delta, gamma, w), "skeleton"
    if kind == "detour":
        # 7-8-9 along the skeleton while the chord gives dist(7, 9) = 1
        nodes[arg].skeleton = [(7, 8), (8, 9)]
        return bcd, (delta, gamma, w), "skeleton"
    if kind == "regraft":
        nodes[arg].parent = 1
        return bcd, (delta, gamma, w), "tree_decomposition"
    return bcd, (delta, gamma, arg), "tree_decomposition"


def test_chain_decomposition_is_valid():
    G, bcd = three_supernode_chain()
    report = validate_buffered_cop_decomposition(G, bcd, *CHAIN_PARAMETERS)
    assert report.valid
    assert report.violations == []


@given(mutation=st.sampled_from(MUTATIONS))
def test_single_mutation_is_reported(mutation):
    G, bcd = three_supernode_chain()
    mutated, parameters, broken = mutate(bcd, mutation)
    report = validate_buffered_cop_decomposition(G, mutated, *parameters)
    assert not report.valid
    assert not report.properties[broken]
    assert validate_buffered_cop_decomposition(G, bcd, *CHAIN_PARAMETERS).valid

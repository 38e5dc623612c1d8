"""Seeded instance generators.

All randomness comes from numpy's PCG64 bit generator seeded with the given
integer, so instances are reproducible across runs and ports. Random weights
are drawn on a 1/64 grid so path sums stay exact in binary floating point.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from metric_sparsity.coreset import ClusteringInstance
from metric_sparsity.decompositions import TreeDecomposition
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.graph import WeightedGraph

logger = logging.getLogger(__name__)

WEIGHT_GRID = 64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _weight_sampler(weight_range: Tuple[float, float], rng: np.random.Generator):
    lo, hi = weight_range
    if not 0 <= lo <= hi:
        raise InvalidArgumentError(f"weight range must satisfy 0 <= lo <= hi, got {weight_range}")
    if lo == hi:
        value = int(lo) if float(lo).is_integer() else float(lo)
        return lambda: value
    low, high = int(np.ceil(lo * WEIGHT_GRID)), int(np.floor(hi * WEIGHT_GRID))
    if low > high:
        raise InvalidArgumentError(f"weight range {weight_range} holds no multiple of 1/{WEIGHT_GRID}")
    return lambda: int(rng.integers(low, high + 1)) / WEIGHT_GRID


def gen_partial_ktree(
    n: int, k: int, edge_keep: float, weight_range: Tuple[float, float], seed: int
) -> Tuple[WeightedGraph, TreeDecomposition]:
    """Random k-tree on n vertices, thinned to a partial k-tree, with its width-k decomposition.

    Starts from a (k+1)-clique; each new vertex joins k vertices of a random bag.
    Edges outside the starting clique survive with probability edge_keep.
    """
    if k < 1 or n < k + 1:
        raise InvalidArgumentError(f"need k >= 1 and n >= k+1, got n={n}, k={k}")
    if not 0 < edge_keep <= 1:
        raise InvalidArgumentError(f"edge_keep must lie in (0, 1], got {edge_keep}")
    rng = make_rng(seed)
    weight = _weight_sampler(weight_range, rng)

    clique = list(range(1, k + 2))
    bags = {0: clique}
    tree_edges: List[Tuple[int, int]] = []
    pairs = [(u, v) for i, u in enumerate(clique) for v in clique[i + 1:]]
    kept = list(pairs)
    for v in range(k + 2, n + 1):
        host = int(rng.integers(len(bags)))
        drop = int(rng.integers(k + 1))
        attach = [u for i, u in enumerate(bags[host]) if i != drop]
        t = len(bags)
        bags[t] = sorted(attach + [v])
        tree_edges.append((host, t))
        for u in attach:
            if edge_keep >= 1 or rng.random() < edge_keep:
                kept.append((u, v))
    edges = [(u, v, weight()) for u, v in kept]
    graph = WeightedGraph(vertex_count=n, edges=edges)
    logger.info(f"Partial {k}-tree: {n} vertices, {len(edges)} edges, seed {seed}")
    return graph, TreeDecomposition(bags=bags, edges=tree_edges, root=0)


def gen_grid(rows: int, cols: int, weight_range: Tuple[float, float] = (1, 1), seed: int = 0) -> WeightedGraph:
    """Vertex (i, j) has id i*cols + j + 1."""
    if rows < 1 or cols < 1:
        raise InvalidArgumentError(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    weight = _weight_sampler(weight_range, make_rng(seed))
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j + 1
            if j + 1 < cols:
                edges.append((v, v + 1, weight()))
            if i + 1 < rows:
                edges.append((v, v + cols, weight()))
    return WeightedGraph(vertex_count=rows * cols, edges=edges)


def gen_star_of_stars(branches: int, leaves: int, weight: float = 1) -> WeightedGraph:
    """Hub 1 joined to `branches` sub-hubs, each carrying `leaves` pendant vertices."""
    if branches < 1 or leaves < 0:
        raise InvalidArgumentError(f"need branches >= 1 and leaves >= 0, got {branches}, {leaves}")
    edges = []
    next_id = 2
    for _ in range(branches):
        hub = next_id
        next_id += 1
        edges.append((1, hub, weight))
        for _ in range(leaves):
            edges.append((hub, next_id, weight))
            next_id += 1
    return WeightedGraph(vertex_count=next_id - 1, edges=edges)


def gen_random_graph(
    n: int, p: float, weight_range: Tuple[float, float], seed: int
) -> WeightedGraph:
    """G(n, p) with grid weights."""
    if n < 1 or not 0 <= p <= 1:
        raise InvalidArgumentError(f"need n >= 1 and p in [0, 1], got n={n}, p={p}")
    rng = make_rng(seed)
    weight = _weight_sampler(weight_range, rng)
    edges = [(u, v, weight()) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < p]
    return WeightedGraph(vertex_count=n, edges=edges)


def gen_clustering_instance(
    graph: WeightedGraph,
    k: int,
    seed: int,
    facilities: Optional[int] = None,
    clients: Optional[Sequence[int]] = None,
) -> ClusteringInstance:
    """Clients default to every vertex; `facilities` random vertices serve as facilities (all when None)."""
    rng = make_rng(seed)
    vertices = list(graph.vertices())
    if facilities is None or facilities >= len(vertices):
        chosen = vertices
    else:
        chosen = sorted(int(v) for v in rng.choice(vertices, size=facilities, replace=False))
    return ClusteringInstance(
        graph=graph, clients=list(clients) if clients is not None else vertices, facilities=chosen, k=k)

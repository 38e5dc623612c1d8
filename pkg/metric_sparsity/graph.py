"""Weighted graphs and the shortest-path primitives every other module builds on."""
import logging
import math
import numbers
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Literal, Optional, Set, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from metric_sparsity.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

INF = math.inf

# Edge weights are int, float or Fraction; distances may also be +inf.
Weight = Any
VertexSet = Tuple[int, ...]
DistanceMap = Dict[int, Weight]


def is_weight(value: Any) -> bool:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        return False
    return value >= 0 and (not isinstance(value, float) or math.isfinite(value))


def exact_ratio(value: Any, divisor: int) -> Weight:
    """value / divisor, kept exact for ints and Fractions."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Fraction(value) / divisor
    return value / divisor


class WeightedGraph(BaseModel):
    """Undirected graph on vertices 1..n with nonnegative edge weights.

    `blocked_edges` are structural edges of infinite weight: tree decompositions
    must cover them, distances never use them.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    vertex_count: int = Field(ge=0)
    edges: List[Tuple[int, int, Any]] = Field(default_factory=list)
    blocked_edges: List[Tuple[int, int]] = Field(default_factory=list)

    _nx: Optional[nx.Graph] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_edges(self) -> "WeightedGraph":
        seen: Set[Tuple[int, int]] = set()
        pairs = [(u, v, w) for u, v, w in self.edges] + [(u, v, None) for u, v in self.blocked_edges]
        for u, v, w in pairs:
            for x in (u, v):
                if not 1 <= x <= self.vertex_count:
                    raise InvalidArgumentError(f"edge ({u}, {v}) has vertex {x} outside 1..{self.vertex_count}")
            if u == v:
                raise InvalidArgumentError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidArgumentError(f"duplicate edge ({u}, {v})")
            seen.add(key)
            if w is not None and not is_weight(w):
                raise InvalidArgumentError(f"edge ({u}, {v}) has invalid weight {w!r}")
        return self

    @property
    def nx_graph(self) -> nx.Graph:
        """Finite-weight edges as a networkx graph, built on first use."""
        if self._nx is None:
            g = nx.Graph()
            g.add_nodes_from(range(1, self.vertex_count + 1))
            g.add_weighted_edges_from(self.edges)
            self._nx = g
        return self._nx

    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    def neighbors(self, v: int) -> List[int]:
        return sorted(self.nx_graph[v])

    def edge_weight(self, u: int, v: int) -> Weight:
        data = self.nx_graph.get_edge_data(u, v)
        return INF if data is None else data["weight"]

    def structural_pairs(self) -> Iterable[Tuple[int, int]]:
        """Every edge, finite or blocked."""
        for u, v, _ in self.edges:
            yield u, v
        yield from self.blocked_edges


def as_vertex_set(G: WeightedGraph, vertices: Iterable[int], name: str = "vertex set") -> VertexSet:
    vs = sorted({int(v) for v in vertices})
    for v in vs:
        if not 1 <= v <= G.vertex_count:
            raise InvalidArgumentError(f"{name}: vertex {v} outside 1..{G.vertex_count}")
    return tuple(vs)


def _view(G: WeightedGraph, allowed: Optional[Set[int]]) -> nx.Graph:
    if allowed is None:
        return G.nx_graph
    return G.nx_graph.subgraph(allowed)


def distances_from(
    G: WeightedGraph,
    sources: Iterable[int],
    allowed: Optional[Set[int]] = None,
    cutoff: Optional[Weight] = None,
) -> DistanceMap:
    """Reached vertices only; no argument checking. Sources must lie in `allowed`."""
    sources = list(sources)
    if not sources:
        return {}
    return nx.multi_source_dijkstra_path_length(_view(G, allowed), sources, cutoff=cutoff, weight="weight")


def shortest_path_predecessors(
    G: WeightedGraph,
    sources: Iterable[int],
    allowed: Optional[Set[int]] = None,
) -> Tuple[DistanceMap, Dict[int, List[int]]]:
    """Distance to the nearest source, in settle order, and every predecessor on a shortest path.

    Sources have no predecessors. Several sources hang off a virtual vertex 0
    with zero-weight edges, which is dropped from the result.
    """
    sources = list(sources)
    if not sources:
        return {}, {}
    H = _view(G, allowed)
    if len(sources) == 1:
        pred, dist = nx.dijkstra_predecessor_and_distance(H, sources[0], weight="weight")
        return dist, pred
    H = nx.Graph(H)
    H.add_weighted_edges_from((0, s, 0) for s in sources)
    pred, dist = nx.dijkstra_predecessor_and_distance(H, 0, weight="weight")
    del dist[0]
    return dist, {v: [u for u in before if u != 0] for v, before in pred.items() if v != 0}


def sssp_distances(
    G: WeightedGraph,
    sources: Iterable[int],
    restrict_to: Optional[Iterable[int]] = None,
) -> DistanceMap:
    """Multi-source distances to every vertex of the (restricted) graph, +inf when unreachable."""
    src = as_vertex_set(G, sources, "sources")
    if not src:
        raise InvalidArgumentError("sources must be nonempty")
    if restrict_to is None:
        domain: Iterable[int] = G.vertices()
        allowed = None
    else:
        domain = as_vertex_set(G, restrict_to, "restrict_to")
        allowed = set(domain)
        missing = [s for s in src if s not in allowed]
        if missing:
            raise InvalidArgumentError(f"sources {missing} lie outside restrict_to")
    reached = distances_from(G, src, allowed)
    return {v: reached.get(v, INF) for v in domain}


def all_pairs_distances(G: WeightedGraph, allowed: Optional[Set[int]] = None) -> Dict[int, DistanceMap]:
    return {u: dict(lengths) for u, lengths in nx.all_pairs_dijkstra_path_length(_view(G, allowed), weight="weight")}


def set_diameter(G: WeightedGraph, A: Iterable[int], mode: Literal["weak", "strong"] = "weak") -> Weight:
    """Weak diameter measures in G, strong diameter in G[A]."""
    if mode not in ("weak", "strong"):
        raise InvalidArgumentError(f"unknown diameter mode {mode!r}")
    verts = as_vertex_set(G, A)
    if not verts:
        raise InvalidArgumentError("diameter of an empty set is undefined")
    allowed = set(verts) if mode == "strong" else None
    worst: Weight = 0
    for v in verts:
        reach = distances_from(G, [v], allowed)
        for u in verts:
            d = reach.get(u, INF)
            if d > worst:
                worst = d
        if worst == INF:
            break
    return worst


def set_distance(
    G: WeightedGraph,
    X: Iterable[int],
    Y: Iterable[int],
    restrict_to: Optional[Iterable[int]] = None,
) -> Weight:
    xs = as_vertex_set(G, X)
    ys = as_vertex_set(G, Y)
    if not xs or not ys:
        return INF
    allowed = None if restrict_to is None else set(as_vertex_set(G, restrict_to))
    if allowed is not None:
        xs = tuple(x for x in xs if x in allowed)
    reach = distances_from(G, xs, allowed)
    return min((reach.get(y, INF) for y in ys), default=INF)


def ball(
    G: WeightedGraph,
    centers: Iterable[int],
    radius: Weight,
    restrict_to: Optional[Iterable[int]] = None,
) -> VertexSet:
    if radius < 0:
        raise InvalidArgumentError(f"ball radius must be nonnegative, got {radius}")
    allowed = None if restrict_to is None else set(as_vertex_set(G, restrict_to))
    src = [c for c in as_vertex_set(G, centers) if allowed is None or c in allowed]
    return tuple(sorted(distances_from(G, src, allowed, cutoff=radius)))


def is_scattered(
    G: WeightedGraph,
    A: Iterable[int],
    r: Weight,
    restrict_to: Optional[Iterable[int]] = None,
) -> bool:
    """True when distinct members of A are pairwise more than r apart."""
    if r < 0:
        raise InvalidArgumentError(f"scatter radius must be nonnegative, got {r}")
    verts = as_vertex_set(G, A)
    allowed = None if restrict_to is None else set(as_vertex_set(G, restrict_to))
    members = set(verts)
    for a in verts:
        if allowed is not None and a not in allowed:
            raise InvalidArgumentError(f"vertex {a} lies outside restrict_to")
        reached = distances_from(G, [a], allowed, cutoff=r)
        if any(b in members for b in reached if b != a):
            return False
    return True


def greedy_maximal_scattered(
    G: WeightedGraph,
    A: Iterable[int],
    r: Weight,
    restrict_to: Optional[Iterable[int]] = None,
) -> VertexSet:
    """Scan A by increasing id, keeping a vertex iff it is more than r from everything kept."""
    if r < 0:
        raise InvalidArgumentError(f"scatter radius must be nonnegative, got {r}")
    verts = as_vertex_set(G, A)
    allowed = None if restrict_to is None else set(as_vertex_set(G, restrict_to))
    chosen: List[int] = []
    covered: Set[int] = set()
    for a in verts:
        if allowed is not None and a not in allowed:
            raise InvalidArgumentError(f"vertex {a} lies outside restrict_to")
        if a in covered:
            continue
        chosen.append(a)
        covered.update(distances_from(G, [a], allowed, cutoff=r))
    return tuple(chosen)


def distance_matrix(
    G: WeightedGraph,
    rows: Iterable[int],
    cols: Iterable[int],
    restrict_to: Optional[Iterable[int]] = None,
) -> np.ndarray:
    """rows x cols distances; object dtype keeps int and Fraction distances exact, float dtype once floats appear."""
    rows = list(rows)
    cols = list(cols)
    allowed = None if restrict_to is None else set(as_vertex_set(G, restrict_to))
    values = []
    for u in rows:
        reach = distances_from(G, [u], allowed)
        values.append([reach.get(v, INF) for v in cols])
    finite = [x for row in values for x in row if x != INF]
    exact = any(isinstance(x, Fraction) for x in finite) or all(isinstance(x, int) for x in finite)
    matrix = np.empty((len(rows), len(cols)), dtype=object if exact else float)
    for i, row in enumerate(values):
        for j, value in enumerate(row):
            matrix[i, j] = value
    return matrix


def remove_vertices(G: WeightedGraph, removed: Iterable[int]) -> Set[int]:
    """Vertex set of G minus `removed`, for use as restrict_to."""
    gone = set(as_vertex_set(G, removed))
    return {v for v in G.vertices() if v not in gone}


def connected_components(G: WeightedGraph, allowed: Optional[Set[int]] = None) -> List[VertexSet]:
    """Components over finite edges, sorted by smallest vertex."""
    comps = [tuple(sorted(c)) for c in nx.connected_components(_view(G, allowed))]
    return sorted(comps, key=lambda c: c[0])

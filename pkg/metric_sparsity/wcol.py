"""Ordered partitions, weak reachability and the two partition constructions."""
import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
from pydantic import BaseModel, Field

from metric_sparsity.config import worker_map
from metric_sparsity.decompositions import (
    BufferedCopDecomposition,
    TreeDecomposition,
    structure_problems,
    supernode_radius_ok,
    validate_tree_decomposition,
)
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.graph import (
    INF,
    Weight,
    WeightedGraph,
    distances_from,
    exact_ratio,
    greedy_maximal_scattered,
    set_diameter,
    shortest_path_predecessors,
)

logger = logging.getLogger(__name__)


class OrderedPartition(BaseModel):
    """Parts in increasing order: list position is the total order on parts."""

    parts: List[List[int]]
    owners: List[int] = Field(default_factory=list)  # supernode or topmost bag behind each part, when known

    def part_of(self) -> Dict[int, int]:
        return {v: i for i, part in enumerate(self.parts) for v in part}

    def check(self, G: WeightedGraph) -> None:
        """Raise InvalidArgumentError unless the parts are nonempty, disjoint and cover V(G)."""
        seen: Dict[int, int] = {}
        for i, part in enumerate(self.parts):
            if not part:
                raise InvalidArgumentError(f"part {i} is empty")
            for v in part:
                if not 1 <= v <= G.vertex_count:
                    raise InvalidArgumentError(f"part {i} holds vertex {v} outside 1..{G.vertex_count}")
                if v in seen:
                    raise InvalidArgumentError(f"vertex {v} lies in parts {seen[v]} and {i}")
                seen[v] = i
        if len(seen) != G.vertex_count:
            missing = [v for v in G.vertices() if v not in seen]
            raise InvalidArgumentError(f"partition misses vertices {missing[:10]}")


class WReachTable(BaseModel):
    radius: Weight
    reach: List[List[int]]  # reach[i]: indices of parts weakly reachable from part i, ascending
    wcol: int

    @property
    def sizes(self) -> List[int]:
        return [len(r) for r in self.reach]


class PartDiameter(BaseModel):
    index: int
    weak: Weight
    strong: Weight


def reach_lists(G: WeightedGraph, parts: Sequence[Sequence[int]], r: Weight) -> List[List[int]]:
    """Weak reachability among `parts`, which need not cover V(G).

    Part j is reached from part i when some path of length <= r runs inside the
    union of parts j, j+1, ... from part i to part j.
    """
    part_of = {v: i for i, part in enumerate(parts) for v in part}
    suffix: List[Set[int]] = [set() for _ in parts]
    running: Set[int] = set()
    for j in range(len(parts) - 1, -1, -1):
        running = running | set(parts[j])
        suffix[j] = running

    def sources_reaching(j: int) -> List[int]:
        reached = distances_from(G, parts[j], allowed=suffix[j], cutoff=r)
        return sorted({part_of[v] for v in reached})

    reach: List[List[int]] = [[] for _ in parts]
    for j, reached_parts in enumerate(worker_map(sources_reaching, range(len(parts)))):
        for i in reached_parts:
            reach[i].append(j)
    return reach


def weak_reach_table(G: WeightedGraph, P: OrderedPartition, r: Weight) -> WReachTable:
    if r <= 0:
        raise InvalidArgumentError(f"r must be positive, got {r}")
    P.check(G)
    reach = reach_lists(G, P.parts, r)
    wcol = max((len(x) for x in reach), default=0)
    logger.info(f"wcol_{r} = {wcol} over {len(P.parts)} parts")
    return WReachTable(radius=r, reach=reach, wcol=wcol)


def partition_diameters(G: WeightedGraph, P: OrderedPartition) -> List[PartDiameter]:
    return [
        PartDiameter(index=i, weak=set_diameter(G, part, "weak"), strong=set_diameter(G, part, "strong"))
        for i, part in enumerate(P.parts)
    ]


# === PARTITION FROM A BUFFERED COP DECOMPOSITION ===

def _nearest_center(G: WeightedGraph, allowed: Set[int], centers: Sequence[int]) -> Dict[int, Tuple[Weight, int]]:
    """Each reachable vertex's lexicographically least (distance, center rank) inside G[allowed].

    A center reaches v at distance dist(v) exactly when a path of tight edges
    joins them, so ranks spread along tight edges, lowest rank first.
    """
    dist, before = shortest_path_predecessors(G, centers, allowed)
    after: Dict[int, List[int]] = {}
    for v, us in before.items():
        for u in us:
            after.setdefault(u, []).append(v)
    best: Dict[int, Tuple[Weight, int]] = {}
    for rank, c in enumerate(centers):
        if c in best:
            continue
        best[c] = (dist[c], rank)
        stack = [c]
        while stack:
            u = stack.pop()
            for v in after.get(u, []):
                if v not in best:
                    best[v] = (dist[v], rank)
                    stack.append(v)
    return best


def partition_from_cop_decomposition(
    G: WeightedGraph, bcd: BufferedCopDecomposition, rho: Weight
) -> OrderedPartition:
    """Split every supernode around a maximal rho/4-scattered subset of its skeleton.

    Each vertex joins the part of its nearest center inside the supernode (ties
    to the lower center rank); ancestors' parts precede descendants'.
    """
    if rho <= 0:
        raise InvalidArgumentError(f"rho must be positive, got {rho}")
    delta = exact_ratio(rho, 4)
    problems = structure_problems(G, bcd)
    if problems:
        raise InvalidArgumentError(f"not a cop decomposition of G: {problems[0].message}")
    if not supernode_radius_ok(G, bcd, delta):
        logger.warning(f"Supernode radius exceeds rho/4={delta}; part diameters are not guaranteed")

    nodes = bcd.by_id()
    parts: List[List[int]] = []
    owners: List[int] = []
    for eta in bcd.order():
        members = set(nodes[eta].vertices)
        centers = greedy_maximal_scattered(G, nodes[eta].skeleton_vertices(), delta, restrict_to=members)
        nearest = _nearest_center(G, members, centers)
        groups: List[List[int]] = [[] for _ in centers]
        stray: List[int] = []
        for v in sorted(members):
            if v in nearest:
                groups[nearest[v][1]].append(v)
            else:
                stray.append(v)
        if stray:
            logger.warning(f"Supernode {eta}: vertices {stray} cannot reach the skeleton; kept as singletons")
        for group in groups + [[v] for v in stray]:
            if group:
                parts.append(group)
                owners.append(eta)
    return OrderedPartition(parts=parts, owners=owners)


# === PARTITION FROM A TREE DECOMPOSITION ===

class _BagCoverState:
    """Bag-copy graph H over pairs (v, t) with v in bag t, plus the coloring state."""

    def __init__(self, G: WeightedGraph, td: TreeDecomposition):
        self.parent, self.depth = td.rooted()
        self.nodes = sorted(td.bags, key=lambda t: (self.depth[t], t))
        self.copies: List[Tuple[int, int]] = []
        self.bag_copies: Dict[int, List[int]] = {}
        index: Dict[Tuple[int, int], int] = {}
        for t in self.nodes:
            self.bag_copies[t] = []
            for v in sorted(td.bags[t]):
                index[(v, t)] = len(self.copies)
                self.bag_copies[t].append(len(self.copies))
                self.copies.append((v, t))

        rows = {v: distances_from(G, [v]) for v in {v for bag in td.bags.values() for v in bag}}
        self.H = nx.Graph()
        self.H.add_nodes_from(range(len(self.copies)))
        for t in self.nodes:
            ids = self.bag_copies[t]
            for a in range(len(ids)):
                for b in range(a + 1, len(ids)):
                    u, v = self.copies[ids[a]][0], self.copies[ids[b]][0]
                    d = rows[u].get(v, INF)
                    if d != INF:
                        self.H.add_edge(ids[a], ids[b], weight=d)
        for a, b in td.edges:
            for v in set(td.bags[a]) & set(td.bags[b]):
                self.H.add_edge(index[(v, a)], index[(v, b)], weight=0)

        children: Dict[int, List[int]] = {t: [] for t in self.nodes}
        for t, p in self.parent.items():
            if p is not None:
                children[p].append(t)
        self.dom: Dict[int, Set[int]] = {}
        for t in reversed(self.nodes):
            below = set(self.bag_copies[t])
            for s in children[t]:
                below |= self.dom[s]
            self.dom[t] = below

    def ancestors_inclusive(self, t: int) -> Set[int]:
        out = set()
        current: Optional[int] = t
        while current is not None:
            out.add(current)
            current = self.parent[current]
        return out

    def ball(self, sources: Sequence[int], allowed: Set[int], radius: Weight) -> Set[int]:
        return set(nx.multi_source_dijkstra_path_length(self.H.subgraph(allowed), list(sources), cutoff=radius))


def partition_from_tree_decomposition(G: WeightedGraph, td: TreeDecomposition, rho: Weight) -> OrderedPartition:
    """Color bag copies round by round with radius-rho/2 balls, then make the balls disjoint."""
    if rho <= 0:
        raise InvalidArgumentError(f"rho must be positive, got {rho}")
    report = validate_tree_decomposition(G, td)
    if not report.valid:
        raise InvalidArgumentError(f"invalid tree decomposition: {report.violations[0].message}")

    delta = exact_ratio(rho, 2)
    state = _BagCoverState(G, td)
    color: List[Optional[int]] = [None] * len(state.copies)
    # (ball, color, top bag) in creation order
    balls: List[Tuple[Set[int], int, int]] = []
    pieces: List[Tuple[Set[int], int, int]] = []  # (vertex set, ball index, position in ball's bag)

    for i in range(1, td.max_bag_size + 1):
        while True:
            t = next(
                (t for t in state.nodes
                 if all(color[h] != i for h in state.bag_copies[t])
                 and any(color[h] is None for h in state.bag_copies[t])),
                None,
            )
            if t is None:
                break
            above = state.ancestors_inclusive(t)
            blocked: Set[int] = set()
            for X, _, top in balls:
                if top in above:
                    blocked |= X
            U = state.dom[t] - blocked
            W = [h for h in state.bag_copies[t] if h in U]
            X = state.ball(W, U, delta)
            balls.append((X, i, t))
            for h in X:
                if color[h] is None:
                    color[h] = i
            for pos, x in enumerate(W):
                Y = {state.copies[h][0] for h in state.ball([x], U, delta)}
                pieces.append((Y, len(balls) - 1, pos))

    if any(c is None for c in color):
        raise RuntimeError("bag-copy coloring left copies uncolored")

    def ball_key(b: int) -> Tuple[int, int, int]:
        top = balls[b][2]
        return state.depth[top], top, b

    pieces.sort(key=lambda p: (ball_key(p[1]), p[2]))
    taken: Set[int] = set()
    parts: List[List[int]] = []
    owners: List[int] = []
    for Y, b, _ in pieces:
        fresh = sorted(Y - taken)
        if fresh:
            parts.append(fresh)
            owners.append(balls[b][2])
            taken.update(fresh)
    logger.info(f"Tree decomposition of width {td.width} gave {len(parts)} parts from {len(balls)} balls")
    return OrderedPartition(parts=parts, owners=owners)


# === WCOL BOUNDS ===

def as_fraction(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def minor_free_wcol_bound(h: int, x) -> int:
    """ceil(C(h-2+2*ceil(4hx), h-1) * (12+8x) * (h-1)) for K_h-minor-free graphs and x = r/rho."""
    x = as_fraction(x)
    if h < 2:
        raise InvalidArgumentError(f"h must be at least 2, got {h}")
    if x <= 1:
        raise InvalidArgumentError(f"r/rho must exceed 1, got {x}")
    top = h - 2 + 2 * math.ceil(4 * h * x)
    return math.ceil(math.comb(top, h - 1) * (12 + 8 * x) * (h - 1))


def treewidth_wcol_bound_terms(k: int, x) -> Tuple[int, int]:
    x = as_fraction(x)
    if k < 1:
        raise InvalidArgumentError(f"bag size bound k must be at least 1, got {k}")
    if x <= 0:
        raise InvalidArgumentError(f"r/rho must be positive, got {x}")
    q = math.ceil(2 * x)
    return k * 2 ** k * math.comb(k + q, k), (2 * q + k + 1) ** (3 * q + 4)


def treewidth_wcol_bound(k: int, x) -> int:
    """Bound for graphs whose tree decompositions have bags of size at most k."""
    return min(treewidth_wcol_bound_terms(k, x))


def evaluate_wcol_bound(kind: str, **params) -> int:
    if kind == "minor_free":
        return minor_free_wcol_bound(params["h"], params["x"])
    if kind == "treewidth":
        return treewidth_wcol_bound(params["k"], params["x"])
    raise InvalidArgumentError(f"unknown wcol bound kind {kind!r}")

"""Tree decompositions and buffered cop decompositions: types, validators and a builder."""
import logging
from collections import deque
from typing import Any, Dict, List, Optional, Set, Tuple, Union

import networkx as nx
from pydantic import BaseModel, Field, PrivateAttr

from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.graph import (
    INF,
    Weight,
    WeightedGraph,
    connected_components,
    distances_from,
    shortest_path_predecessors,
)

logger = logging.getLogger(__name__)


class Violation(BaseModel):
    kind: str
    message: str
    witness: Dict[str, Any] = Field(default_factory=dict)


# === TREE DECOMPOSITIONS ===

class TreeDecomposition(BaseModel):
    bags: Dict[int, List[int]]
    edges: List[Tuple[int, int]] = Field(default_factory=list)
    root: Optional[int] = None

    _rooted: Optional[Tuple[Dict[int, Optional[int]], Dict[int, int]]] = PrivateAttr(default=None)

    @property
    def max_bag_size(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0)

    @property
    def width(self) -> int:
        return self.max_bag_size - 1

    def root_node(self) -> int:
        return self.root if self.root is not None else min(self.bags)

    def tree(self) -> nx.Graph:
        T = nx.Graph()
        T.add_nodes_from(self.bags)
        T.add_edges_from(self.edges)
        return T

    def rooted(self) -> Tuple[Dict[int, Optional[int]], Dict[int, int]]:
        """(parent, depth) of every node reachable from the root."""
        if self._rooted is None:
            T = self.tree()
            root = self.root_node()
            parent: Dict[int, Optional[int]] = {root: None}
            depth = {root: 0}
            queue = deque([root])
            while queue:
                t = queue.popleft()
                for s in sorted(T[t]):
                    if s not in parent:
                        parent[s] = t
                        depth[s] = depth[t] + 1
                        queue.append(s)
            self._rooted = (parent, depth)
        return self._rooted


class TreeDecompositionReport(BaseModel):
    valid: bool
    width: Optional[int] = None
    violations: List[Violation] = Field(default_factory=list)


def validate_tree_decomposition(G: WeightedGraph, td: TreeDecomposition) -> TreeDecompositionReport:
    """Check tree shape, vertex coverage, vertex connectivity and edge coverage (blocked edges included)."""
    violations: List[Violation] = []
    if not td.bags:
        violations.append(Violation(kind="structure", message="decomposition has no bags"))
        return TreeDecompositionReport(valid=False, violations=violations)

    for a, b in td.edges:
        if a not in td.bags or b not in td.bags:
            violations.append(Violation(
                kind="structure", message=f"tree edge ({a}, {b}) references a missing bag", witness={"edge": [a, b]}))
    if violations:
        return TreeDecompositionReport(valid=False, violations=violations)

    T = td.tree()
    if T.number_of_edges() != len(td.edges):
        violations.append(Violation(kind="structure", message="tree edges contain duplicates or self-loops"))
    elif not nx.is_tree(T):
        problem = "cycle" if not nx.is_forest(T) else "disconnected tree"
        violations.append(Violation(kind="structure", message=f"bag graph is not a tree ({problem})"))

    nodes_of: Dict[int, Set[int]] = {}
    for t, bag in td.bags.items():
        for v in bag:
            if not 1 <= v <= G.vertex_count:
                violations.append(Violation(
                    kind="vertex_range", message=f"bag {t} holds vertex {v} outside 1..{G.vertex_count}",
                    witness={"bag": t, "vertex": v}))
                continue
            nodes_of.setdefault(v, set()).add(t)

    for v in G.vertices():
        nodes = nodes_of.get(v)
        if not nodes:
            violations.append(Violation(
                kind="vertex_missing", message=f"vertex {v} appears in no bag", witness={"vertex": v}))
        elif len(nodes) > 1 and not nx.is_connected(T.subgraph(nodes)):
            violations.append(Violation(
                kind="vertex_disconnected", message=f"bags holding vertex {v} are not connected",
                witness={"vertex": v, "bags": sorted(nodes)}))

    for u, v in G.structural_pairs():
        if not nodes_of.get(u, set()) & nodes_of.get(v, set()):
            violations.append(Violation(
                kind="edge_uncovered", message=f"no bag holds both ends of edge ({u}, {v})",
                witness={"edge": [u, v]}))

    valid = not violations
    return TreeDecompositionReport(valid=valid, width=td.width if valid else None, violations=violations)


# === BUFFERED COP DECOMPOSITIONS ===

class Supernode(BaseModel):
    id: int = Field(ge=1)
    parent: int = Field(0, ge=0)  # 0 is the virtual root above every component
    root: int
    vertices: List[int]
    skeleton: List[Tuple[int, int]] = Field(default_factory=list)

    def skeleton_vertices(self) -> List[int]:
        verts = {self.root}
        for u, v in self.skeleton:
            verts.add(u)
            verts.add(v)
        return sorted(verts)

    def skeleton_tree(self) -> nx.Graph:
        S = nx.Graph()
        S.add_node(self.root)
        S.add_edges_from(self.skeleton)
        return S

    def skeleton_leaves(self) -> List[int]:
        S = self.skeleton_tree()
        return sorted(v for v in S if v != self.root and S.degree(v) == 1)


class BufferedCopDecomposition(BaseModel):
    supernodes: List[Supernode]

    def by_id(self) -> Dict[int, Supernode]:
        return {s.id: s for s in self.supernodes}

    def children(self) -> Dict[int, List[int]]:
        kids: Dict[int, List[int]] = {0: []}
        for s in self.supernodes:
            kids.setdefault(s.id, [])
        for s in sorted(self.supernodes, key=lambda s: s.id):
            kids.setdefault(s.parent, []).append(s.id)
        return kids

    def ancestors(self, eta: int) -> List[int]:
        """Proper ancestors, nearest first, excluding the virtual root."""
        nodes = self.by_id()
        out = []
        current = nodes[eta].parent
        while current:
            out.append(current)
            current = nodes[current].parent
        return out

    def depth(self, eta: int) -> int:
        return len(self.ancestors(eta))

    def order(self) -> List[int]:
        """Supernode ids with every ancestor before its descendants."""
        return sorted((s.id for s in self.supernodes), key=lambda i: (self.depth(i), i))

    def dom(self, eta: int) -> Set[int]:
        nodes = self.by_id()
        kids = self.children()
        out: Set[int] = set()
        stack = [eta]
        while stack:
            x = stack.pop()
            out.update(nodes[x].vertices)
            stack.extend(kids.get(x, []))
        return out


class CopParameters(BaseModel):
    delta: Weight
    gamma: Weight
    w: int


class CopDecompositionReport(BaseModel):
    valid: bool
    properties: Dict[str, bool]
    violations: List[Violation] = Field(default_factory=list)


def structure_problems(G: WeightedGraph, bcd: BufferedCopDecomposition) -> List[Violation]:
    problems: List[Violation] = []
    ids = [s.id for s in bcd.supernodes]
    if len(set(ids)) != len(ids):
        problems.append(Violation(kind="structure", message="duplicate supernode ids"))
        return problems
    known = set(ids)
    for s in bcd.supernodes:
        if s.parent and s.parent not in known:
            problems.append(Violation(
                kind="structure", message=f"supernode {s.id} has unknown parent {s.parent}",
                witness={"supernode": s.id}))
    if problems:
        return problems
    nodes = bcd.by_id()
    for s in bcd.supernodes:
        seen = {s.id}
        current = s.parent
        while current:
            if current in seen:
                problems.append(Violation(
                    kind="structure", message=f"partition tree has a cycle through {s.id}",
                    witness={"supernode": s.id}))
                return problems
            seen.add(current)
            current = nodes[current].parent

    owner: Dict[int, int] = {}
    for s in bcd.supernodes:
        if not s.vertices:
            problems.append(Violation(
                kind="structure", message=f"supernode {s.id} is empty", witness={"supernode": s.id}))
        for v in s.vertices:
            if not 1 <= v <= G.vertex_count:
                problems.append(Violation(
                    kind="structure", message=f"supernode {s.id} holds vertex {v} outside the graph",
                    witness={"supernode": s.id, "vertex": v}))
            elif v in owner:
                problems.append(Violation(
                    kind="structure", message=f"vertex {v} lies in supernodes {owner[v]} and {s.id}",
                    witness={"vertex": v}))
            else:
                owner[v] = s.id
        members = set(s.vertices)
        if s.root not in members:
            problems.append(Violation(
                kind="structure", message=f"skeleton root {s.root} lies outside supernode {s.id}",
                witness={"supernode": s.id}))
        for u, v in s.skeleton:
            if u not in members or v not in members or not G.nx_graph.has_edge(u, v):
                problems.append(Violation(
                    kind="structure", message=f"skeleton edge ({u}, {v}) of supernode {s.id} is not an edge of G[V]",
                    witness={"supernode": s.id, "edge": [u, v]}))
        if not nx.is_tree(s.skeleton_tree()):
            problems.append(Violation(
                kind="structure", message=f"skeleton of supernode {s.id} is not a tree",
                witness={"supernode": s.id}))
    missing = [v for v in G.vertices() if v not in owner]
    if missing:
        problems.append(Violation(
            kind="structure", message=f"vertices {missing[:10]} belong to no supernode",
            witness={"vertices": missing}))
    return problems


def supernode_radius_ok(G: WeightedGraph, bcd: BufferedCopDecomposition, delta: Weight, tolerance: Weight = 0) -> bool:
    for s in bcd.supernodes:
        reach = distances_from(G, s.skeleton_vertices(), allowed=set(s.vertices))
        if any(reach.get(v, INF) > delta + tolerance for v in s.vertices):
            return False
    return True


def _adjacent(G: WeightedGraph, A: Set[int], B: Set[int]) -> bool:
    small, large = (A, B) if len(A) <= len(B) else (B, A)
    return any(u in large for v in small for u in G.nx_graph[v])


def _skeleton_distances(G: WeightedGraph, s: Supernode) -> Dict[int, Tuple[Weight, List[int]]]:
    """Distance from the skeleton root along the skeleton, with the path."""
    S = s.skeleton_tree()
    out = {s.root: (0, [s.root])}
    queue = deque([s.root])
    while queue:
        u = queue.popleft()
        for v in sorted(S[u]):
            if v not in out:
                d, path = out[u]
                out[v] = (d + G.edge_weight(u, v), path + [v])
                queue.append(v)
    return out


def _adjacent_ancestors(G: WeightedGraph, bcd: BufferedCopDecomposition, eta: int) -> List[int]:
    nodes = bcd.by_id()
    own = set(nodes[eta].vertices)
    return [z for z in bcd.ancestors(eta) if _adjacent(G, own, set(nodes[z].vertices))]


def _bag_decomposition(G: WeightedGraph, bcd: BufferedCopDecomposition) -> TreeDecomposition:
    """Partition tree with bag W(eta) = union of V(zeta) over eta and its adjacent ancestors."""
    nodes = bcd.by_id()
    bags: Dict[int, List[int]] = {}
    edges: List[Tuple[int, int]] = []
    for s in bcd.supernodes:
        members = set(s.vertices)
        for z in _adjacent_ancestors(G, bcd, s.id):
            members.update(nodes[z].vertices)
        bags[s.id] = sorted(members)
    tops = [s.id for s in bcd.supernodes if not s.parent]
    for s in bcd.supernodes:
        if s.parent:
            edges.append((s.parent, s.id))
    if len(tops) > 1:
        bags[0] = []
        edges.extend((0, t) for t in tops)
        return TreeDecomposition(bags=bags, edges=edges, root=0)
    return TreeDecomposition(bags=bags, edges=edges, root=tops[0] if tops else None)


def validate_buffered_cop_decomposition(
    G: WeightedGraph,
    bcd: BufferedCopDecomposition,
    delta: Weight,
    gamma: Weight,
    w: int,
    tolerance: Weight = 0,
) -> CopDecompositionReport:
    """Check radius, shortest-path skeleton, buffer and tree-decomposition properties."""
    if delta <= 0 or gamma <= 0 or w < 1:
        raise InvalidArgumentError(f"need delta > 0, gamma > 0, w >= 1; got {delta}, {gamma}, {w}")
    properties = {"structure": True, "radius": True, "skeleton": True, "buffer": True, "tree_decomposition": True}
    violations = structure_problems(G, bcd)
    if violations:
        return CopDecompositionReport(
            valid=False, properties={k: False for k in properties}, violations=violations)

    nodes = bcd.by_id()
    dom_cache: Dict[int, Set[int]] = {}

    def dom(eta: int) -> Set[int]:
        if eta not in dom_cache:
            dom_cache[eta] = bcd.dom(eta)
        return dom_cache[eta]

    # === RADIUS ===
    for s in bcd.supernodes:
        reach = distances_from(G, s.skeleton_vertices(), allowed=set(s.vertices))
        for v in s.vertices:
            d = reach.get(v, INF)
            if d > delta + tolerance:
                properties["radius"] = False
                violations.append(Violation(
                    kind="radius", message=f"vertex {v} is {d} from the skeleton of supernode {s.id}",
                    witness={"supernode": s.id, "vertex": v, "distance": d}))

    # === SKELETON ===
    for s in bcd.supernodes:
        along = _skeleton_distances(G, s)
        exact = distances_from(G, [s.root], allowed=dom(s.id))
        for v, (d_tree, path) in along.items():
            d_true = exact.get(v, INF)
            if abs(d_tree - d_true) > tolerance:
                properties["skeleton"] = False
                violations.append(Violation(
                    kind="skeleton", message=f"skeleton path to {v} in supernode {s.id} is not shortest",
                    witness={"supernode": s.id, "path": path, "length": d_tree, "distance": d_true}))
        leaves = s.skeleton_leaves()
        if len(leaves) > w:
            properties["skeleton"] = False
            violations.append(Violation(
                kind="skeleton", message=f"skeleton of supernode {s.id} has {len(leaves)} leaves",
                witness={"supernode": s.id, "leaves": leaves}))

    # === BUFFER ===
    reach_of: Dict[int, Dict[int, Weight]] = {}
    for s in bcd.supernodes:
        own = set(s.vertices)
        for z in bcd.ancestors(s.id):
            if _adjacent(G, own, set(nodes[z].vertices)):
                continue
            if z not in reach_of:
                reach_of[z] = distances_from(G, nodes[z].vertices, allowed=dom(z))
            d = min((reach_of[z].get(v, INF) for v in s.vertices), default=INF)
            if d <= gamma - tolerance:
                properties["buffer"] = False
                violations.append(Violation(
                    kind="buffer", message=f"supernode {s.id} is {d} from non-adjacent ancestor {z}",
                    witness={"supernode": s.id, "ancestor": z, "distance": d}))

    # === TREE DECOMPOSITION ===
    for s in bcd.supernodes:
        attached = 1 + len(_adjacent_ancestors(G, bcd, s.id))
        if attached > w:
            properties["tree_decomposition"] = False
            violations.append(Violation(
                kind="tree_decomposition", message=f"supernode {s.id} touches {attached - 1} ancestors",
                witness={"supernode": s.id}))
    report = validate_tree_decomposition(G, _bag_decomposition(G, bcd))
    if not report.valid:
        properties["tree_decomposition"] = False
        violations.extend(report.violations)

    return CopDecompositionReport(valid=all(properties.values()), properties=properties, violations=violations)


def measure_cop_decomposition(G: WeightedGraph, bcd: BufferedCopDecomposition) -> CopParameters:
    """Smallest radius and width, and a buffer value, for which `bcd` validates.

    The buffer condition is strict, so the reported gamma is half the smallest
    distance between a supernode and a non-adjacent ancestor (+inf if none).
    """
    nodes = bcd.by_id()
    radius: Weight = 0
    w = 1
    nearest: Weight = INF
    for s in bcd.supernodes:
        reach = distances_from(G, s.skeleton_vertices(), allowed=set(s.vertices))
        radius = max([radius] + [reach.get(v, INF) for v in s.vertices])
        w = max(w, len(s.skeleton_leaves()), 1 + len(_adjacent_ancestors(G, bcd, s.id)))
        own = set(s.vertices)
        for z in bcd.ancestors(s.id):
            if _adjacent(G, own, set(nodes[z].vertices)):
                continue
            reach_z = distances_from(G, nodes[z].vertices, allowed=bcd.dom(z))
            nearest = min([nearest] + [reach_z.get(v, INF) for v in s.vertices])
    gamma = INF if nearest == INF else nearest / 2
    return CopParameters(delta=radius, gamma=gamma, w=w)


def shortest_path_tree(
    G: WeightedGraph, root: int, allowed: Set[int]
) -> Tuple[Dict[int, Weight], Dict[int, Optional[int]]]:
    """Dijkstra from `root` inside G[allowed]; ties broken toward the smaller predecessor id."""
    dist, before = shortest_path_predecessors(G, [root], allowed)
    settled = {v: i for i, v in enumerate(dist)}
    # zero-weight edges can list a later-settled vertex as a predecessor
    pred = {v: min((u for u in before[v] if settled[u] < settled[v]), default=None) for v in dist}
    return dist, pred


def heuristic_cop_decomposition(
    G: WeightedGraph, delta: Weight, h: int
) -> Tuple[BufferedCopDecomposition, CopParameters]:
    """Peel supernodes off each remaining component.

    A supernode's skeleton is a shortest-path tree, inside the component, from
    a root touching the parent toward every adjacent ancestor, plus the
    component's farthest vertex while fewer than h-1 targets are chased. The
    supernode is the delta-ball around its skeleton.
    """
    if delta <= 0:
        raise InvalidArgumentError(f"delta must be positive, got {delta}")
    if h < 2:
        raise InvalidArgumentError(f"h must be at least 2, got {h}")

    supernodes: List[Supernode] = []
    owner: Dict[int, int] = {}
    parent_of: Dict[int, int] = {}
    queue = deque((set(c), 0) for c in connected_components(G))

    while queue:
        comp, parent = queue.popleft()
        eta = len(supernodes) + 1
        ancestors = []
        current = parent
        while current:
            ancestors.append(current)
            current = parent_of[current]

        touching: Dict[int, List[int]] = {}
        for v in comp:
            for u in G.nx_graph[v]:
                if u in owner:
                    touching.setdefault(owner[u], []).append(v)
        if parent:
            root = min(touching[parent])
        else:
            root = min(comp)

        dist, pred = shortest_path_tree(G, root, comp)
        targets: List[int] = []
        for z in ancestors[1:]:
            if z in touching:
                targets.append(min(touching[z], key=lambda v: (dist[v], v)))
        if len(touching) > h - 1:
            logger.warning(f"Supernode {eta}: component touches {len(touching)} ancestors, more than h-1={h - 1}")
        if len(set(targets)) < h - 1:
            targets.append(max(comp, key=lambda v: (dist[v], -v)))

        skeleton_vertices = {root}
        skeleton_edges: Set[Tuple[int, int]] = set()
        for target in targets:
            v = target
            while v != root and v not in skeleton_vertices:
                skeleton_vertices.add(v)
                skeleton_edges.add((pred[v], v))
                v = pred[v]

        members = set(distances_from(G, sorted(skeleton_vertices), allowed=comp, cutoff=delta))
        supernodes.append(Supernode(
            id=eta, parent=parent, root=root, vertices=sorted(members), skeleton=sorted(skeleton_edges)))
        parent_of[eta] = parent
        for v in members:
            owner[v] = eta
        rest = comp - members
        for c in connected_components(G, rest):
            queue.append((set(c), eta))

    bcd = BufferedCopDecomposition(supernodes=supernodes)
    achieved = measure_cop_decomposition(G, bcd)
    achieved = CopParameters(delta=delta, gamma=achieved.gamma, w=achieved.w)
    logger.info(f"Built cop decomposition with {len(supernodes)} supernodes, w={achieved.w}, gamma={achieved.gamma}")
    return bcd, achieved


def load_decomposition(
    G: WeightedGraph, decomposition: Union[BufferedCopDecomposition, int], delta: Weight
) -> BufferedCopDecomposition:
    """Accept either a ready decomposition or the h for the heuristic builder."""
    if isinstance(decomposition, BufferedCopDecomposition):
        return decomposition
    bcd, _ = heuristic_cop_decomposition(G, delta, int(decomposition))
    return bcd

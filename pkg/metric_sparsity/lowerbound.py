"""Recursive lower-bound graphs G(k, r, d): bounded treewidth, yet long ladders.

Weights stay exact Fractions. Edges of infinite weight are kept as blocked
structural edges so the emitted tree decomposition covers them.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel

from metric_sparsity.config import get_settings
from metric_sparsity.decompositions import TreeDecomposition
from metric_sparsity.errors import InstanceTooLargeError, InvalidArgumentError
from metric_sparsity.graph import Weight, WeightedGraph
from metric_sparsity.ladders import EpsLadder
from metric_sparsity.wcol import as_fraction

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class LBParams(BaseModel):
    k: int
    r: int
    d: int
    epsilon: Optional[Weight] = None


class LBLevel(BaseModel):
    k: int
    r: int
    epsilon: Weight
    gamma: Weight
    inner_epsilon: Weight
    scale: Weight


class LBInstance(BaseModel):
    params: LBParams
    graph: WeightedGraph
    matching: List[Tuple[int, int]]
    ladder: Optional[EpsLadder] = None
    td: TreeDecomposition
    levels: List[LBLevel]


@dataclass(frozen=True)
class _Piece:
    """A built G(k, r, d) on local ids 0..size-1; weight None marks a blocked edge."""

    size: int
    edges: Tuple[Tuple[int, int, Optional[Fraction]], ...]
    matching: Tuple[Tuple[int, int], ...]
    ladder: Tuple[Tuple[int, int], ...]
    bags: Tuple[Tuple[int, ...], ...]
    bag_edges: Tuple[Tuple[int, int], ...]
    pair_bag: Dict[FrozenSet[int], int] = field(hash=False, compare=False)
    levels: Tuple[LBLevel, ...] = ()

    def scaled(self, factor: Fraction) -> "_Piece":
        return replace(self, edges=tuple((u, v, None if w is None else w * factor) for u, v, w in self.edges))


# === COUNTS ===

def _tree_size(depth: int, d: int) -> int:
    return depth if d == 1 else (d ** depth - 1) // (d - 1)


@lru_cache(maxsize=None)
def lb_matching_size(k: int, r: int, d: int = 2) -> int:
    if k == 1:
        return d ** r
    if r == 1:
        return d ** k
    return lb_matching_size(k, r - 1, d) * d * lb_matching_size(k - 1, r, d)


@lru_cache(maxsize=None)
def lb_vertex_count(k: int, r: int, d: int = 2) -> int:
    """Vertices of G(k, r, d), computed without building it."""
    if k < 1 or r < 1 or d < 1:
        raise InvalidArgumentError(f"need k, r, d >= 1, got k={k}, r={r}, d={d}")
    if k == 1:
        return _tree_size(r + 1, d) + d ** r
    if r == 1:
        return _tree_size(k + 1, d) + d ** k
    return lb_vertex_count(k, r - 1, d) + lb_matching_size(k, r - 1, d) * d * lb_vertex_count(k - 1, r, d)


def lb_ladder_length(k: int, r: int) -> int:
    if k < 1 or r < 1:
        raise InvalidArgumentError(f"need k, r >= 1, got k={k}, r={r}")
    return 2 ** math.comb(k + r - 2, r - 1)


# === CONSTRUCTION ===

def _tree_with_twins(depth: int, d: int, to_ancestors: bool, weighted: bool) -> _Piece:
    """Complete d-ary tree of the given depth; every leaf gets a twin adjacent to it and its neighbors.

    Tree vertices are adjacent to their parent, or to every ancestor when
    `to_ancestors` is set.
    """
    parent: List[Optional[int]] = [None]
    frontier = [0]
    for _ in range(1, depth):
        nxt = []
        for u in frontier:
            for _ in range(d):
                parent.append(u)
                nxt.append(len(parent) - 1)
        frontier = nxt
    leaves = frontier

    def up(v: int) -> List[int]:
        if not to_ancestors:
            return [] if parent[v] is None else [parent[v]]
        chain = []
        while parent[v] is not None:
            v = parent[v]
            chain.append(v)
        return chain

    size = len(parent)
    edges: List[Tuple[int, int]] = [(a, v) for v in range(size) for a in up(v)]
    bags: List[Tuple[int, ...]] = [tuple(sorted([v] + up(v))) for v in range(size)]
    bag_edges = [(parent[v], v) for v in range(1, size)]
    matching = []
    pair_bag: Dict[FrozenSet[int], int] = {}
    for leaf in leaves:
        twin = size
        size += 1
        edges.append((leaf, twin))
        edges.extend((a, twin) for a in up(leaf))
        bags[leaf] = tuple(sorted(bags[leaf] + (twin,)))
        matching.append((leaf, twin))
        pair_bag[frozenset((leaf, twin))] = leaf

    if not weighted:
        return _Piece(size, tuple((u, v, Fraction(1)) for u, v in edges), tuple(matching), (),
                      tuple(bags), tuple(bag_edges), pair_bag)

    (x, p), (x2, p2) = matching[0], matching[1]
    weighted_edges = []
    for u, v in edges:
        ends = {u, v}
        if x in ends or p2 in ends:
            w = None
        elif p in ends or x2 in ends:
            w = HALF
        else:
            w = Fraction(0)
        weighted_edges.append((u, v, w))
    return _Piece(size, tuple(weighted_edges), tuple(matching), ((x, p), (x2, p2)),
                  tuple(bags), tuple(bag_edges), pair_bag)


@lru_cache(maxsize=None)
def _build(k: int, r: int, d: int, eps: Optional[Fraction]) -> _Piece:
    weighted = eps is not None
    if k == 1:
        return _tree_with_twins(r + 1, d, False, weighted)
    if r == 1:
        return _tree_with_twins(k + 1, d, True, weighted)

    levels: List[LBLevel] = []
    if weighted:
        gamma = (1 - eps) / (2 * r * eps)
        scale = 1 - 2 * gamma * eps
        inner_eps = eps / scale
        if not 0 < inner_eps < 1:
            raise InvalidArgumentError(f"G({k},{r}): derived epsilon {inner_eps} leaves (0, 1)")
        if not r - 1 < (1 - inner_eps) / inner_eps:
            raise InvalidArgumentError(f"G({k},{r}): r-1 < (1-eps')/eps' fails for eps'={inner_eps}")
        inner = _build(k, r - 1, d, inner_eps).scaled(scale)
        connector = gamma * eps
        levels.append(LBLevel(k=k, r=r, epsilon=eps, gamma=gamma, inner_epsilon=inner_eps, scale=scale))
    else:
        inner = _build(k, r - 1, d, None)
        connector = Fraction(1)
    copy = _build(k - 1, r, d, eps)
    levels.extend(inner.levels)
    levels.extend(copy.levels)

    size = inner.size
    edges = list(inner.edges)
    bags = list(inner.bags)
    bag_edges = list(inner.bag_edges)
    matching: List[Tuple[int, int]] = []
    pair_bag: Dict[FrozenSet[int], int] = {}
    rung_of = {frozenset(pair): i for i, pair in enumerate(inner.ladder)}
    rungs: Dict[int, List[Tuple[int, int]]] = {}
    centers = {x for x, _ in copy.ladder}
    points = {p for _, p in copy.ladder}

    for v, v2 in inner.matching:
        key = frozenset((v, v2))
        rung = rung_of.get(key) if weighted else None
        for c in range(d):
            offset = size
            size += copy.size
            live = not weighted or (rung is not None and c == 0)
            edges.extend((a + offset, b + offset, w if live else None) for a, b, w in copy.edges)
            if rung is not None and c == 0:
                x_i, p_i = inner.ladder[rung]
                for u in range(copy.size):
                    edges.append((u + offset, x_i, connector if u in centers else None))
                    edges.append((u + offset, p_i, connector if u in points else None))
                rungs[rung] = [(x + offset, p + offset) for x, p in copy.ladder]
            else:
                for u in range(copy.size):
                    edges.append((u + offset, v, connector if not weighted else None))
                    edges.append((u + offset, v2, connector if not weighted else None))

            base = len(bags)
            bags.extend(tuple(sorted({a + offset for a in bag} | {v, v2})) for bag in copy.bags)
            bag_edges.extend((a + base, b + base) for a, b in copy.bag_edges)
            bag_edges.append((inner.pair_bag[key], base))
            matching.extend((a + offset, b + offset) for a, b in copy.matching)
            for pair, bag in copy.pair_bag.items():
                pair_bag[frozenset(a + offset for a in pair)] = bag + base

    ladder = tuple(pair for i in range(len(inner.ladder)) for pair in rungs[i])
    return _Piece(size, tuple(edges), tuple(matching), ladder, tuple(bags), tuple(bag_edges),
                  pair_bag, tuple(levels))


def _instance(piece: _Piece, params: LBParams) -> LBInstance:
    graph = WeightedGraph(
        vertex_count=piece.size,
        edges=[(u + 1, v + 1, w) for u, v, w in piece.edges if w is not None],
        blocked_edges=[(u + 1, v + 1) for u, v, w in piece.edges if w is None],
    )
    td = TreeDecomposition(
        bags={t: [v + 1 for v in bag] for t, bag in enumerate(piece.bags)},
        edges=list(piece.bag_edges),
        root=0,
    )
    ladder = None
    if params.epsilon is not None:
        ladder = EpsLadder(epsilon=params.epsilon, width=Fraction(1), pairs=[(x + 1, p + 1) for x, p in piece.ladder])
    unique = {(lv.k, lv.r, lv.epsilon): lv for lv in piece.levels}
    return LBInstance(
        params=params,
        graph=graph,
        matching=[(a + 1, b + 1) for a, b in piece.matching],
        ladder=ladder,
        td=td,
        levels=[unique[key] for key in sorted(unique, key=lambda t: (-t[0] - t[1], -t[0], t[2]))],
    )


def _guard_size(k: int, r: int, d: int) -> None:
    count = lb_vertex_count(k, r, d)
    cap = get_settings().max_lb_vertices
    if count > cap:
        raise InstanceTooLargeError(f"G({k},{r},{d}) has {count} vertices, above MST_MAX_LB_VERTICES={cap}")


def build_lb_instance(k: int, r: int, epsilon, d: int = 2) -> LBInstance:
    """Weighted G(k, r, 2) with a ladder of width 1 and length 2^C(k+r-2, r-1)."""
    if k < 1 or r < 1:
        raise InvalidArgumentError(f"need k, r >= 1, got k={k}, r={r}")
    if d != 2:
        raise InvalidArgumentError(f"weighted ladders need d = 2, got d={d}; use lb_unweighted for other d")
    eps = as_fraction(epsilon)
    if not 0 < eps < 1:
        raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {eps}")
    if not r < (1 - eps) / eps:
        raise InvalidArgumentError(f"need r < (1-eps)/eps = {(1 - eps) / eps}, got r={r}")
    _guard_size(k, r, d)
    instance = _instance(_build(k, r, d, eps), LBParams(k=k, r=r, d=d, epsilon=eps))
    logger.info(
        f"Built G({k},{r},{d}) with {instance.graph.vertex_count} vertices, "
        f"{len(instance.graph.blocked_edges)} blocked edges, ladder length {instance.ladder.length}")
    return instance


def lb_unweighted(k: int, r: int, d: int = 2) -> LBInstance:
    """Structural G(k, r, d) with unit weights, its matching and width-2k decomposition."""
    if k < 1 or r < 1 or d < 1:
        raise InvalidArgumentError(f"need k, r, d >= 1, got k={k}, r={r}, d={d}")
    _guard_size(k, r, d)
    return _instance(_build(k, r, d, None), LBParams(k=k, r=r, d=d))

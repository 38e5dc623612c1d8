"""ε-ladders: validation, greedy and exact longest-ladder search, and the scatter-dimension bounds."""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from metric_sparsity.config import get_settings
from metric_sparsity.decompositions import TreeDecomposition
from metric_sparsity.errors import InstanceTooLargeError, InvalidArgumentError
from metric_sparsity.graph import INF, Weight, WeightedGraph, as_vertex_set, distance_matrix, distances_from
from metric_sparsity.wcol import (
    as_fraction,
    minor_free_wcol_bound,
    partition_from_tree_decomposition,
    weak_reach_table,
)

logger = logging.getLogger(__name__)


class EpsLadder(BaseModel):
    """Pairs (x_i, p_i): each p_i is within r of every later center and far from its own."""

    epsilon: Weight
    width: Weight
    pairs: List[Tuple[int, int]] = Field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.pairs)


class LadderViolation(BaseModel):
    kind: str  # "own", "cross", "lb_extra" or "matching"
    i: int
    j: Optional[int] = None
    distance: Weight
    bound: Weight


class LadderReport(BaseModel):
    valid: bool
    length: int
    first_violation: Optional[LadderViolation] = None


def validate_ladder(
    G: WeightedGraph,
    ladder: EpsLadder,
    lb_extra: bool = False,
    matching: Optional[Sequence[Tuple[int, int]]] = None,
    tolerance: Weight = 0,
) -> LadderReport:
    """Check the ladder in order; indices in the report are 1-based."""
    eps, r = ladder.epsilon, ladder.width
    if eps <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {eps}")
    if r <= 0:
        raise InvalidArgumentError(f"width must be positive, got {r}")
    as_vertex_set(G, [v for pair in ladder.pairs for v in pair], "ladder")
    far = (1 + eps) * r
    rows: Dict[int, Dict[int, Weight]] = {}

    def dist(p: int, x: int) -> Weight:
        if p not in rows:
            rows[p] = distances_from(G, [p])
        return rows[p].get(x, INF)

    def fail(kind: str, i: int, j: Optional[int], d: Weight, bound: Weight) -> LadderReport:
        return LadderReport(valid=False, length=ladder.length, first_violation=LadderViolation(
            kind=kind, i=i, j=j, distance=d, bound=bound))

    matched = None if matching is None else {frozenset(e) for e in matching}
    pairs = ladder.pairs
    for i, (x_i, p_i) in enumerate(pairs, start=1):
        own = dist(p_i, x_i)
        if not own > far - tolerance:
            return fail("own", i, None, own, far)
        for j in range(1, i):
            d = dist(pairs[j - 1][1], x_i)
            if d > r + tolerance:
                return fail("cross", i, j, d, r)
        if matched is not None and frozenset((x_i, p_i)) not in matched:
            return fail("matching", i, None, own, 0)
    if lb_extra:
        for i, (_, p_i) in enumerate(pairs, start=1):
            for j, (x_j, _) in enumerate(pairs, start=1):
                d = dist(p_i, x_j)
                if d < r - tolerance:
                    return fail("lb_extra", i, j, d, r)
    return LadderReport(valid=True, length=ladder.length)


class _LadderSearch:
    """Distance tables between points and centers shared by the ladder searches."""

    def __init__(self, G: WeightedGraph, centers: Sequence[int], points: Sequence[int], eps: Weight, r: Weight):
        if eps <= 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {eps}")
        if r <= 0:
            raise InvalidArgumentError(f"r must be positive, got {r}")
        self.centers = list(as_vertex_set(G, centers, "centers"))
        self.points = list(as_vertex_set(G, points, "points"))
        D = distance_matrix(G, self.points, self.centers)
        # close[p, x]: p may precede center x; far[p, x]: (x, p) may be a pair
        self.close = np.array(D <= r, dtype=bool).reshape(D.shape)
        self.far = np.array(D > (1 + eps) * r, dtype=bool).reshape(D.shape)

    def pair(self, xi: int, pi: int) -> Tuple[int, int]:
        return self.centers[xi], self.points[pi]


def greedy_ladder(
    G: WeightedGraph, centers: Sequence[int], points: Sequence[int], eps: Weight, r: Weight
) -> EpsLadder:
    """Repeatedly append the first valid pair in (center id, point id) order."""
    search = _LadderSearch(G, centers, points, eps, r)
    eligible = np.ones(len(search.centers), dtype=bool)
    pairs: List[Tuple[int, int]] = []
    while True:
        nxt = None
        for xi in np.flatnonzero(eligible):
            candidates = np.flatnonzero(search.far[:, xi])
            if candidates.size:
                nxt = (int(xi), int(candidates[0]))
                break
        if nxt is None:
            break
        pairs.append(search.pair(*nxt))
        eligible &= search.close[nxt[1]]
    return EpsLadder(epsilon=eps, width=r, pairs=pairs)


def _check_brute_force_size(centers: Sequence[int], points: Sequence[int], limit_n: int) -> None:
    cap = min(limit_n, get_settings().brute_force_limit)
    if len(set(centers)) > cap or len(set(points)) > cap:
        raise InstanceTooLargeError(
            f"exact ladder search limited to {cap} centers and points, got {len(set(centers))} and {len(set(points))}")


def brute_force_longest_ladder(
    G: WeightedGraph,
    centers: Sequence[int],
    points: Sequence[int],
    eps: Weight,
    r: Weight,
    limit_n: int = 10,
) -> EpsLadder:
    """Exact longest ladder.

    A prefix only constrains the future through the centers still within r of
    every chosen point, so the search memoizes on that set.
    """
    _check_brute_force_size(centers, points, limit_n)
    search = _LadderSearch(G, centers, points, eps, r)
    n_points = len(search.points)
    close_mask = [sum(1 << x for x in np.flatnonzero(search.close[p])) for p in range(n_points)]
    far_points = [np.flatnonzero(search.far[:, x]).tolist() for x in range(len(search.centers))]
    memo: Dict[int, Tuple[int, Optional[Tuple[int, int]]]] = {}

    def longest(eligible: int) -> int:
        if eligible in memo:
            return memo[eligible][0]
        best, choice = 0, None
        mask, x = eligible, 0
        while mask:
            if mask & 1:
                for p in far_points[x]:
                    length = 1 + longest(eligible & close_mask[p])
                    if length > best:
                        best, choice = length, (x, p)
            mask >>= 1
            x += 1
        memo[eligible] = (best, choice)
        return best

    eligible = (1 << len(search.centers)) - 1
    longest(eligible)
    pairs: List[Tuple[int, int]] = []
    while memo[eligible][1] is not None:
        x, p = memo[eligible][1]
        pairs.append(search.pair(x, p))
        eligible &= close_mask[p]
    return EpsLadder(epsilon=eps, width=r, pairs=pairs)


def exhaustive_longest_ladder(
    G: WeightedGraph,
    centers: Sequence[int],
    points: Sequence[int],
    eps: Weight,
    r: Weight,
    limit_n: int = 6,
) -> EpsLadder:
    """Enumerate every valid sequence without memoization; a check on the exact search."""
    _check_brute_force_size(centers, points, limit_n)
    search = _LadderSearch(G, centers, points, eps, r)
    best: List[Tuple[int, int]] = []

    def extend(prefix: List[Tuple[int, int]]) -> None:
        nonlocal best
        if len(prefix) > len(best):
            best = list(prefix)
        for x in range(len(search.centers)):
            if not all(search.close[p, x] for _, p in prefix):
                continue
            for p in range(len(search.points)):
                if search.far[p, x]:
                    prefix.append((x, p))
                    extend(prefix)
                    prefix.pop()

    extend([])
    return EpsLadder(epsilon=eps, width=r, pairs=[search.pair(x, p) for x, p in best])


# === BOUNDS ===

def _log2(x) -> float:
    x = as_fraction(x)
    return math.log2(x.numerator) - math.log2(x.denominator)


def _guard_bits(kind: str, bits: float) -> None:
    cap = get_settings().max_bound_bits
    if bits > cap:
        raise InstanceTooLargeError(f"{kind} bound has about 2^{bits:.4g} magnitude, above MST_MAX_BOUND_BITS={cap}")


def thm1_constant(h: int, eps) -> int:
    """wcol bound for K_h-minor-free graphs at r/rho = 9/eps."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {eps}")
    return minor_free_wcol_bound(h, 9 / eps)


def ladder_length_bound(c: int, x) -> int:
    """(6c(x+2)^c)^(c+1), rounded up: longest ladder over a partition with wcol c and r/rho = x."""
    x = as_fraction(x)
    if c < 1:
        raise InvalidArgumentError(f"c must be at least 1, got {c}")
    if x <= 1:
        raise InvalidArgumentError(f"r/rho must exceed 1, got {x}")
    _guard_bits("ladder", (c + 1) * (math.log2(6 * c) + c * _log2(x + 2)))
    return math.ceil((6 * c * (x + 2) ** c) ** (c + 1))


def dim_bound_log2(kind: str, **params) -> float:
    if kind == "thm1":
        eps = as_fraction(params["epsilon"])
        c = thm1_constant(params["h"], eps)
        return (c + 1) * (math.log2(6 * c) + c * _log2(9 / eps + 2))
    if kind == "lemma4":
        c, x = params["c"], as_fraction(params["x"])
        return (c + 1) * (math.log2(6 * c) + c * _log2(x + 2))
    if kind == "thm3":
        return float(math.comb(params["t"] + params["r"], params["t"]))
    raise InvalidArgumentError(f"unknown dimension bound kind {kind!r}")


def evaluate_dim_bound(kind: str, **params) -> int:
    """Exact bound on ladder length; InstanceTooLargeError past MST_MAX_BOUND_BITS."""
    if kind == "thm1":
        eps = as_fraction(params["epsilon"])
        c = thm1_constant(params["h"], eps)
        return ladder_length_bound(c, 9 / eps)
    if kind == "lemma4":
        c, x = params["c"], as_fraction(params["x"])
        eps = params.get("epsilon")
        if eps is not None and x < 3 / as_fraction(eps):
            raise InvalidArgumentError(f"need rho <= eps*r/3, i.e. r/rho >= {3 / as_fraction(eps)}")
        return ladder_length_bound(c, x)
    if kind == "thm3":
        t, r = params["t"], params["r"]
        if t < 1 or r < 1:
            raise InvalidArgumentError(f"t and r must be positive, got t={t}, r={r}")
        exponent = math.comb(t + r, t)
        _guard_bits("thm3", exponent)
        return 2 ** exponent
    raise InvalidArgumentError(f"unknown dimension bound kind {kind!r}")


class DimBound(BaseModel):
    kind: str
    log2: float
    value: Optional[int] = None  # None once the exact integer passes MST_MAX_BOUND_BITS

    @property
    def exact(self) -> bool:
        return self.value is not None


def dim_bound(kind: str, **params) -> DimBound:
    """Exact bound when it fits the bit budget, its base-2 logarithm otherwise."""
    try:
        value = evaluate_dim_bound(kind, **params)
    except InstanceTooLargeError as e:
        logger.warning(f"Reporting log2 only: {e}")
        return DimBound(kind=kind, log2=dim_bound_log2(kind, **params))
    return DimBound(kind=kind, log2=_log2(value), value=value)


class ProbeReport(BaseModel):
    rho: Weight
    parts: int
    wcol_3r: int
    bound_log2: float
    ladder: EpsLadder
    exact: bool


def ladder_from_partition_probe(
    G: WeightedGraph,
    td: TreeDecomposition,
    eps: Weight,
    r: Weight,
    centers: Optional[Sequence[int]] = None,
    points: Optional[Sequence[int]] = None,
) -> ProbeReport:
    """Set rho = eps*r/3, measure wcol_3r of the tree-decomposition partition and compare
    the implied ladder bound with the longest ladder found."""
    if eps <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {eps}")
    rho = as_fraction(eps) * as_fraction(r) / 3
    if isinstance(eps, float) or isinstance(r, float):
        rho = float(rho)
    P = partition_from_tree_decomposition(G, td, rho)
    c = weak_reach_table(G, P, 3 * r).wcol
    centers = list(G.vertices()) if centers is None else list(centers)
    points = list(G.vertices()) if points is None else list(points)
    cap = get_settings().brute_force_limit
    exact = len(set(centers)) <= cap and len(set(points)) <= cap
    if exact:
        ladder = brute_force_longest_ladder(G, centers, points, eps, r, limit_n=cap)
    else:
        ladder = greedy_ladder(G, centers, points, eps, r)
    bound_log2 = dim_bound_log2("lemma4", c=c, x=3 / as_fraction(eps))
    logger.info(f"Probe: {len(P.parts)} parts, wcol_3r={c}, ladder length {ladder.length}, bound 2^{bound_log2:.1f}")
    return ProbeReport(rho=rho, parts=len(P.parts), wcol_3r=c, bound_log2=bound_log2, ladder=ladder, exact=exact)

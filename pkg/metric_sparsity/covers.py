"""Sparse covers from weak reachability, and the flatness selection that turns wcol into scatter bounds."""
import logging
from typing import Dict, List, Literal, Optional, Sequence, Set, Union

from pydantic import BaseModel, Field

from metric_sparsity.decompositions import BufferedCopDecomposition, load_decomposition
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.graph import (
    INF,
    Weight,
    WeightedGraph,
    all_pairs_distances,
    as_vertex_set,
    distances_from,
    exact_ratio,
    is_scattered,
    set_diameter,
)
from metric_sparsity.wcol import OrderedPartition, partition_from_cop_decomposition, reach_lists, weak_reach_table

logger = logging.getLogger(__name__)


# === SPARSE COVERS ===

class CoverFamily(BaseModel):
    radius: Weight
    rho: Weight
    sets: List[List[int]]
    diameter_blowup: Weight  # largest weak diameter of a set, divided by the radius
    overlap: int
    blowup_bound: Weight
    wcol_2r: int


class CoverReport(BaseModel):
    covered: bool
    uncovered_vertex: Optional[int] = None
    blowup_ok: bool
    overlap_ok: bool


def sparse_cover(
    G: WeightedGraph, P: OrderedPartition, r: Weight, rho: Weight, tolerance: Weight = 0
) -> CoverFamily:
    """One set per part X: the union of all parts that weakly 2r-reach X."""
    if r <= 0:
        raise InvalidArgumentError(f"r must be positive, got {r}")
    if rho < 0:
        raise InvalidArgumentError(f"rho must be nonnegative, got {rho}")
    P.check(G)
    distances = all_pairs_distances(G)
    for i, part in enumerate(P.parts):
        diameter = max(distances[u].get(v, INF) for u in part for v in part)
        if diameter > rho + tolerance:
            raise InvalidArgumentError(f"part {i} has weak diameter {diameter} > rho={rho}")

    table = weak_reach_table(G, P, 2 * r)
    members: List[Set[int]] = [set() for _ in P.parts]
    for y, reached in enumerate(table.reach):
        for x in reached:
            members[x].update(P.parts[y])

    counts: Dict[int, int] = {}
    worst: Weight = 0
    for D in members:
        for v in D:
            counts[v] = counts.get(v, 0) + 1
        diameter = max(distances[u].get(v, INF) for u in D for v in D)
        worst = max(worst, diameter)
    overlap = max(counts.values(), default=0)
    cover = CoverFamily(
        radius=r,
        rho=rho,
        sets=[sorted(D) for D in members],
        diameter_blowup=exact_ratio(worst, 1) / r if worst != INF else INF,
        overlap=overlap,
        blowup_bound=4 + 3 * exact_ratio(rho, 1) / r,
        wcol_2r=table.wcol,
    )
    logger.info(f"Cover with {len(members)} sets: blowup {cover.diameter_blowup}, overlap {overlap}")
    return cover


def verify_cover(G: WeightedGraph, cover: CoverFamily, tolerance: Weight = 0) -> CoverReport:
    """Check every r-ball lies inside one set, plus the blowup and overlap bounds."""
    sets = [set(D) for D in cover.sets]
    containing: Dict[int, List[int]] = {}
    for i, D in enumerate(sets):
        for v in D:
            containing.setdefault(v, []).append(i)
    uncovered = None
    for v in G.vertices():
        reached = set(distances_from(G, [v], cutoff=cover.radius))
        if not any(reached <= sets[i] for i in containing.get(v, [])):
            uncovered = v
            break
    return CoverReport(
        covered=uncovered is None,
        uncovered_vertex=uncovered,
        blowup_ok=cover.diameter_blowup <= cover.blowup_bound + tolerance,
        overlap_ok=cover.overlap <= cover.wcol_2r,
    )


# === FLATNESS ===

class FlatnessResult(BaseModel):
    S: List[int] = Field(default_factory=list)  # removed part indices, in selection order
    B: List[int] = Field(default_factory=list)  # surviving part indices
    S_sets: List[List[int]] = Field(default_factory=list)
    B_sets: List[List[int]] = Field(default_factory=list)
    c: int
    guarantees: Literal["proved", "empirical"]
    first_loop_iterations: int = 0
    verification: Dict[str, bool] = Field(default_factory=dict)


def _reach_without(G: WeightedGraph, P: OrderedPartition, removed: Sequence[int], r: Weight) -> Dict[int, Set[int]]:
    """Weak r-reachability in G minus the removed parts, keyed by original part index."""
    gone = set(removed)
    kept = [i for i in range(len(P.parts)) if i not in gone]
    lists = reach_lists(G, [P.parts[i] for i in kept], r)
    return {kept[a]: {kept[b] for b in reached} for a, reached in enumerate(lists)}


def _scattered_parts(
    G: WeightedGraph, P: OrderedPartition, chosen: Sequence[int], removed: Sequence[int], r: Weight
) -> bool:
    gone = {v for i in removed for v in P.parts[i]}
    allowed = {v for v in G.vertices() if v not in gone}
    owner = {v: i for i in chosen for v in P.parts[i]}
    for i in chosen:
        reached = distances_from(G, P.parts[i], allowed=allowed, cutoff=r)
        if any(owner.get(v, i) != i for v in reached):
            return False
    return True


def flatness(
    G: WeightedGraph,
    r: Weight,
    P: OrderedPartition,
    m: int,
    A: Sequence[int],
    c: Optional[int] = None,
) -> FlatnessResult:
    """Remove few parts so that many parts of A become pairwise far apart.

    First loop: while some part is weakly reached from at least |A|/(2mc) parts
    of A, remove the lowest-index such part and keep only the parts of A that
    reach it. Second loop: greedily keep the lowest-index part of A whose
    reachability set is disjoint from those already kept.
    """
    if r <= 0:
        raise InvalidArgumentError(f"r must be positive, got {r}")
    if m < 0:
        raise InvalidArgumentError(f"m must be nonnegative, got {m}")
    P.check(G)
    active = sorted(set(A))
    for y in active:
        if not 0 <= y < len(P.parts):
            raise InvalidArgumentError(f"part index {y} outside 0..{len(P.parts) - 1}")

    original = [set(x) for x in weak_reach_table(G, P, r).reach]
    wcol = max((len(x) for x in original), default=0)
    if c is None:
        c = wcol
    elif c < wcol:
        raise InvalidArgumentError(f"c={c} is below wcol_r={wcol}")
    proved = m == 0 or len(active) >= (2 * m * c) ** (c + 1)
    if not proved:
        logger.warning(f"|A|={len(active)} is below (2mc)^(c+1); flatness guarantees are empirical")

    S: List[int] = []
    iterations = 0
    while m > 0 and active:
        reach = _reach_without(G, P, S, r)
        chosen = None
        for x in range(len(P.parts)):
            if x in reach:
                count = sum(1 for y in active if x in reach.get(y, ()))
                # count >= |A| / (2mc), kept in integers
                if count * 2 * m * c >= len(active):
                    chosen = x
                    break
        if chosen is None:
            break
        active = [y for y in active if chosen in reach.get(y, ())]
        S.append(chosen)
        iterations += 1
        assert active, "first loop emptied A"
        assert all(s in original[y] for s in S for y in active), "removed part not reached from all of A"
        assert iterations <= c, "first loop ran more than c times"

    reach = _reach_without(G, P, S, r)
    remaining = [y for y in active if y not in set(S)]
    B: List[int] = []
    while remaining:
        x = remaining[0]
        B.append(x)
        remaining = [y for y in remaining if not reach[y] & reach[x]]

    disjoint = all(not reach[a] & reach[b] for i, a in enumerate(B) for b in B[i + 1:])
    verification = {
        "s_size_ok": len(S) <= c,
        "b_wreach_disjoint": disjoint,
        "b_scattered": _scattered_parts(G, P, B, S, r),
        "b_size_ok": len(B) >= m,
    }
    if proved and not verification["b_size_ok"]:
        logger.error(f"Flatness returned |B|={len(B)} < m={m} although |A| met the proved threshold")
    return FlatnessResult(
        S=S,
        B=B,
        S_sets=[list(P.parts[i]) for i in S],
        B_sets=[list(P.parts[i]) for i in B],
        c=c,
        guarantees="proved" if proved else "empirical",
        first_loop_iterations=iterations,
        verification=verification,
    )


class FlatScatteredResult(BaseModel):
    S: List[List[int]]
    B: List[int]
    partition_size: int
    flatness: FlatnessResult
    verification: Dict[str, bool]


def flat_scattered(
    G: WeightedGraph,
    decomposition: Union[BufferedCopDecomposition, int],
    r: Weight,
    rho: Weight,
    m: int,
    A: Sequence[int],
) -> FlatScatteredResult:
    """Flatness on vertices: removed sets have strong diameter <= rho and the survivors of A are r-scattered.

    `decomposition` is a buffered cop decomposition, or the h of a K_h-minor-free
    graph to build one heuristically.
    """
    if not r > rho > 0:
        raise InvalidArgumentError(f"need r > rho > 0, got r={r}, rho={rho}")
    points = as_vertex_set(G, A, "A")
    if not is_scattered(G, points, rho):
        raise InvalidArgumentError(f"A is not {rho}-scattered")
    bcd = load_decomposition(G, decomposition, exact_ratio(rho, 4))
    P = partition_from_cop_decomposition(G, bcd, rho)
    part_of = P.part_of()
    indices = sorted({part_of[a] for a in points})
    if len(indices) < len(points):
        logger.warning("Some part holds two points of A; part diameters exceed rho")

    result = flatness(G, r, P, m, indices)
    kept = set(result.B)
    S = result.S_sets
    B = [a for a in points if part_of[a] in kept]
    gone = {v for part in S for v in part}
    allowed = [v for v in G.vertices() if v not in gone]
    verification = {
        "s_strong_diameter_ok": all(set_diameter(G, part, "strong") <= rho for part in S),
        "b_scattered": is_scattered(G, B, r, restrict_to=allowed) if B else True,
        "b_size_ok": len(B) >= m,
    }
    return FlatScatteredResult(
        S=S, B=B, partition_size=len(P.parts), flatness=result, verification=verification)

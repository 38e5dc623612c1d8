"""k-Center coresets: seed, scattered clients, per-radius ladder sequences, and a brute-force verifier."""
import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from metric_sparsity.config import get_settings
from metric_sparsity.errors import InstanceTooLargeError, InvalidArgumentError
from metric_sparsity.graph import (
    INF,
    Weight,
    WeightedGraph,
    as_vertex_set,
    distance_matrix,
    greedy_maximal_scattered,
)
from metric_sparsity.wcol import as_fraction, evaluate_wcol_bound

logger = logging.getLogger(__name__)


class ClusteringInstance(BaseModel):
    graph: WeightedGraph
    clients: List[int]
    facilities: List[int]
    k: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_sets(self) -> "ClusteringInstance":
        if not self.clients or not self.facilities:
            raise InvalidArgumentError("clients and facilities must be nonempty")
        self.clients = list(as_vertex_set(self.graph, self.clients, "clients"))
        self.facilities = list(as_vertex_set(self.graph, self.facilities, "facilities"))
        return self


class LadderPair(BaseModel):
    centers: List[int]
    point: int


class LadderSequence(BaseModel):
    radius: Weight
    delta: Weight
    pairs: List[LadderPair] = Field(default_factory=list)

    @property
    def points(self) -> List[int]:
        return [pair.point for pair in self.pairs]


class CoresetParams(BaseModel):
    epsilon: Weight
    delta: Weight
    r_tilde: Weight
    r_star: Weight
    beta: int
    seed_centers: List[int]
    level_count: int
    c: Optional[int] = None
    lambda_: Optional[int] = None
    gamma_cap: Optional[int] = None
    sequence_bound_log2: Optional[float] = None


class CoresetResult(BaseModel):
    S: List[int]
    Z: List[int]
    levels: List[LadderSequence]
    params: CoresetParams
    verification: Dict[str, bool] = Field(default_factory=dict)


class CoresetVerification(BaseModel):
    ok: bool
    worst_ratio: Weight
    witness: List[int]
    subsets_checked: int


def _plain(value: Weight) -> Weight:
    """Python scalar for a numpy table entry."""
    return value.item() if isinstance(value, np.generic) else value


class _Distances:
    """Client-by-facility distance table with id lookups."""

    def __init__(self, inst: ClusteringInstance):
        self.clients = inst.clients
        self.facilities = inst.facilities
        self.row = {p: i for i, p in enumerate(self.clients)}
        self.col = {f: j for j, f in enumerate(self.facilities)}
        self.table = distance_matrix(inst.graph, self.clients, self.facilities)

    def __call__(self, client: int, facility: int) -> Weight:
        return _plain(self.table[self.row[client], self.col[facility]])

    def to_set(self, client: int, facilities: Sequence[int]) -> Weight:
        return min((self(client, f) for f in facilities), default=INF)


# === SEEDING ===

def greedy_kcenter_seed(inst: ClusteringInstance) -> Tuple[List[int], Weight, int]:
    """Farthest-point greedy seed with its approximation factor.

    With F = V it starts from the lowest-id facility and keeps adding the
    client farthest from the chosen centers (Gonzalez, factor 2). Otherwise
    each pick is the facility nearest to the farthest client, the k-supplier
    greedy with factor 3.
    """
    dist = _Distances(inst)
    whole = set(inst.facilities) == set(inst.graph.vertices())
    beta = 2 if whole else 3
    chosen: List[int] = []
    current = {p: INF for p in inst.clients}

    def add(center: int) -> None:
        chosen.append(center)
        for p in inst.clients:
            current[p] = min(current[p], dist(p, center))

    if whole:
        add(min(inst.facilities))
    while len(chosen) < inst.k:
        far = max(inst.clients, key=lambda p: (current[p], -p))
        if current[far] == 0:
            break
        nearest = min(inst.facilities, key=lambda f: (dist(far, f), f))
        if dist(far, nearest) == INF:
            raise InvalidArgumentError(f"client {far} cannot reach any facility")
        if nearest in chosen:
            break
        add(nearest)
    unreachable = [p for p in inst.clients if current[p] == INF]
    if unreachable:
        raise InvalidArgumentError(f"clients {unreachable[:10]} cannot reach the seed centers")
    r_tilde = max(current.values())
    logger.info(f"Seed: {len(chosen)} centers, radius {r_tilde}, factor {beta}")
    return sorted(chosen), r_tilde, beta


# === LADDER SEQUENCES ===

def _set_cover(universe: Set[int], candidates: Dict[int, Set[int]], cap: int) -> Optional[List[int]]:
    """Greedy cover of `universe` by at most `cap` candidate sets, largest gain first (ties to lower id)."""
    uncovered = set(universe)
    picked: List[int] = []
    while uncovered:
        best, gain = None, 0
        for v in sorted(candidates):
            g = len(candidates[v] & uncovered)
            if g > gain:
                best, gain = v, g
        if best is None or len(picked) == cap:
            return None
        picked.append(best)
        uncovered -= candidates[best]
    return picked


def extend_sequence(
    inst: ClusteringInstance,
    P_set: Sequence[int],
    r_prime: Weight,
    delta: Weight,
    cap: int,
    dist: Optional[_Distances] = None,
) -> Optional[Tuple[List[int], int]]:
    """Find (X, p) with every point of P_set within r' of X and p farther than (1+delta)r' from X."""
    if cap < 1:
        raise InvalidArgumentError(f"cap must be at least 1, got {cap}")
    dist = dist or _Distances(inst)
    taken = set(P_set)
    far = (1 + delta) * r_prime
    for p in inst.clients:
        if p in taken:
            continue
        candidates = {
            v: {q for q in taken if dist(q, v) <= r_prime}
            for v in inst.facilities
            if dist(p, v) > far
        }
        cover = _set_cover(taken, candidates, cap)
        if cover is not None:
            return sorted(cover), p
    return None


def sequence_cap(k: int, length: int) -> int:
    return k * math.ceil(math.log(max(length, 2)) + 1)


def check_ladder_sequence(inst: ClusteringInstance, seq: LadderSequence, max_centers: int) -> Dict[str, bool]:
    dist = _Distances(inst)
    far = (1 + seq.delta) * seq.radius
    pairs = seq.pairs
    return {
        "own_far": all(dist.to_set(pair.point, pair.centers) > far for pair in pairs),
        "earlier_close": all(
            dist.to_set(pairs[i].point, pairs[j].centers) <= seq.radius
            for j in range(len(pairs)) for i in range(j)
        ),
        "center_count": all(len(pair.centers) <= max_centers for pair in pairs),
    }


# === BOUNDS ===

def sequence_bound_log2(c: int, lam: int, k: int, eps) -> float:
    """log2 of (2c(lam*k+2)(3/eps+2)^c)^(c+1)."""
    return (c + 1) * (math.log2(2 * c) + math.log2(lam * k + 2) + c * math.log2(3 / eps + 2))


def sequence_length_bound(c: int, lam: int, k: int, eps) -> int:
    bits = sequence_bound_log2(c, lam, k, eps)
    if bits > get_settings().max_bound_bits:
        raise InstanceTooLargeError(f"sequence-length bound has about 2^{bits:.4g} magnitude")
    eps = as_fraction(eps)
    return math.ceil((2 * c * (lam * k + 2) * (3 / eps + 2) ** c) ** (c + 1))


def gamma_cap(c: int, k: int, eps) -> int:
    return math.ceil(3 * (c + 1) * (2 * k + c * (4 + 3 / eps + 2 * k)))


def solve_lambda(c: int, k: int, eps, max_rounds: int = 100) -> int:
    """Least fixed point of lam = ceil(log2 of the sequence-length bound), from lam = 1, capped at gamma_cap."""
    cap = gamma_cap(c, k, eps)
    lam = 1
    for _ in range(max_rounds):
        nxt = math.ceil(sequence_bound_log2(c, lam, k, eps))
        if nxt >= cap:
            return cap
        if nxt <= lam:
            return lam
        lam = nxt
    return lam


# === PIPELINE ===

def sqrt_below(x, bits: int = 32) -> Fraction:
    """Largest multiple of 2^-bits that does not exceed sqrt(x)."""
    x = as_fraction(x)
    if x < 0:
        raise InvalidArgumentError(f"cannot take the square root of {x}")
    scale = 1 << bits
    return Fraction(math.isqrt(x.numerator * scale * scale // x.denominator), scale)


def build_coreset(inst: ClusteringInstance, epsilon: Weight, h: Optional[int] = None) -> CoresetResult:
    """Coreset S with max over all clients <= (1+eps) max over S, for every center set of size <= k."""
    if not 0 < epsilon < 1:
        raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {epsilon}")
    dist = _Distances(inst)
    seed, r_tilde, beta = greedy_kcenter_seed(inst)
    eps = as_fraction(epsilon)
    delta = sqrt_below(1 + eps) - 1
    if delta <= 0:
        raise InvalidArgumentError(f"epsilon {epsilon} is too small for the radius grid")

    if r_tilde == 0:
        S = list(greedy_maximal_scattered(inst.graph, inst.clients, 0))
        params = CoresetParams(
            epsilon=epsilon, delta=delta, r_tilde=0, r_star=0, beta=beta, seed_centers=seed, level_count=0)
        logger.info(f"Optimum radius is 0; coreset keeps {len(S)} clients")
        return CoresetResult(S=S, Z=S, levels=[], params=params)

    Z = list(greedy_maximal_scattered(inst.graph, inst.clients, 2 * r_tilde))
    assert len(Z) <= inst.k, "more than k clients pairwise farther than twice the seed radius"

    r_star = r_tilde / (beta * (1 + eps))
    ceiling = beta * (1 + delta) * r_tilde / eps
    levels: List[LadderSequence] = []
    radius = r_star
    while radius <= ceiling:
        seq = LadderSequence(radius=radius, delta=delta)
        while True:
            found = extend_sequence(inst, seq.points, radius, delta, sequence_cap(inst.k, len(seq.pairs)), dist)
            if found is None:
                break
            seq.pairs.append(LadderPair(centers=found[0], point=found[1]))
        levels.append(seq)
        radius *= 1 + delta

    S = sorted(set(Z).union(*(seq.points for seq in levels)))
    params = CoresetParams(
        epsilon=epsilon, delta=delta, r_tilde=r_tilde, r_star=r_star, beta=beta,
        seed_centers=seed, level_count=len(levels))
    verification = {"level_count_ok": len(levels) <= 9 / eps ** 3}
    if h is not None:
        c = evaluate_wcol_bound("minor_free", h=h, x=9 / eps)
        lam = solve_lambda(c, inst.k, epsilon)
        bound = sequence_bound_log2(c, lam, inst.k, epsilon)
        params.c, params.lambda_, params.gamma_cap, params.sequence_bound_log2 = c, lam, gamma_cap(c, inst.k, epsilon), bound
        longest = max((len(seq.pairs) for seq in levels), default=0)
        verification["sequence_length_ok"] = longest == 0 or math.log2(longest) <= bound
    if beta != 2:
        logger.warning("Facilities differ from V(G); seed factor 3 used for the radius levels")
    logger.info(f"Coreset of {len(S)} clients from {len(levels)} radius levels")
    return CoresetResult(S=S, Z=Z, levels=levels, params=params, verification=verification)


def verify_coreset_bruteforce(
    inst: ClusteringInstance, S: Sequence[int], epsilon: Weight, k_max: int
) -> CoresetVerification:
    """Try every facility set of size 1..k_max; ratio is max over all clients / max over S, 0/0 = 1."""
    if k_max < 1:
        raise InvalidArgumentError(f"k_max must be at least 1, got {k_max}")
    coreset = list(as_vertex_set(inst.graph, S, "coreset"))
    outside = [p for p in coreset if p not in set(inst.clients)]
    if not coreset or outside:
        raise InvalidArgumentError(f"coreset must be a nonempty subset of the clients, got extra {outside}")
    n = len(inst.facilities)
    total = sum(math.comb(n, j) for j in range(1, min(k_max, n) + 1))
    cap = get_settings().verify_max_subsets
    if total > cap:
        raise InstanceTooLargeError(f"{total} facility subsets exceed MST_VERIFY_MAX_SUBSETS={cap}")

    dist = _Distances(inst)
    rows = np.array([dist.row[p] for p in coreset])
    worst: Weight = 1
    witness: List[int] = []
    ok = True
    for size in range(1, min(k_max, n) + 1):
        for cols in itertools.combinations(range(n), size):
            nearest = dist.table[:, list(cols)].min(axis=1)
            all_max = _plain(nearest.max())
            s_max = _plain(nearest[rows].max())
            if all_max > (1 + epsilon) * s_max:
                ok = False
            if s_max == 0:
                ratio = 1 if all_max == 0 else INF
            else:
                ratio = Fraction(all_max) / s_max if isinstance(all_max, int) else all_max / s_max
            if ratio > worst:
                worst, witness = ratio, [inst.facilities[j] for j in cols]
    logger.info(f"Checked {total} facility sets: worst ratio {worst}")
    return CoresetVerification(ok=ok, worst_ratio=worst, witness=witness, subsets_checked=total)


def counterexample_instance(n: int, epsilon: Weight) -> ClusteringInstance:
    """Clients p_i and centers x_i: dist(p_i, x_i) = 1+eps, every other client-center distance 1.

    Dropping any client from a coreset loses a factor 1+eps at k = 1.
    """
    if n < 3:
        raise InvalidArgumentError(f"need n >= 3 so detours stay longer than 1+eps, got {n}")
    if not 0 < epsilon < 1:
        raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {epsilon}")
    edges = [(i, n + j, 1 + epsilon if i == j else 1) for i in range(1, n + 1) for j in range(1, n + 1)]
    graph = WeightedGraph(vertex_count=2 * n, edges=edges)
    return ClusteringInstance(
        graph=graph, clients=list(range(1, n + 1)), facilities=list(range(n + 1, 2 * n + 1)), k=1)

import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from metric_sparsity.config import configure_logging
from metric_sparsity.coreset import (
    build_coreset,
    check_ladder_sequence,
    counterexample_instance,
    sequence_cap,
    verify_coreset_bruteforce,
)
from metric_sparsity.covers import flatness, sparse_cover, verify_cover
from metric_sparsity.decompositions import (
    heuristic_cop_decomposition,
    validate_buffered_cop_decomposition,
    validate_tree_decomposition,
)
from metric_sparsity.errors import InvalidArgumentError
from metric_sparsity.generators import (
    gen_clustering_instance,
    gen_grid,
    gen_partial_ktree,
    gen_random_graph,
    gen_star_of_stars,
)
from metric_sparsity.graph import remove_vertices, set_diameter, set_distance
from metric_sparsity.ladders import (
    brute_force_longest_ladder,
    exhaustive_longest_ladder,
    greedy_ladder,
    validate_ladder,
)
from metric_sparsity.lowerbound import build_lb_instance, lb_ladder_length
from metric_sparsity.wcol import (
    OrderedPartition,
    evaluate_wcol_bound,
    partition_from_cop_decomposition,
    partition_from_tree_decomposition,
    weak_reach_table,
)
from verify_bounds import verify_bounds

logger = logging.getLogger(__name__)

RESULTS_PATH = Path(__file__).resolve().parent / "evaluation_results.json"

LB_CASES = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2)]
EPS = Fraction(1, 10)

Outcome = Tuple[int, int, Dict]


def partial_ktree_instances(count: int = 100, n: int = 100):
    """Seeded partial k-trees, k cycling through 1, 2, 3, weights in [1, 10]."""
    for seed in range(count):
        k = 1 + seed % 3
        G, td = gen_partial_ktree(n, k, 0.8, (1, 10), seed)
        yield seed, k, G, td


# === CRITERIA ===

def lower_bound_certificates() -> Outcome:
    passed, details = 0, {}
    for k, r in LB_CASES:
        inst = build_lb_instance(k, r, EPS)
        ladder = validate_ladder(inst.graph, inst.ladder, lb_extra=True, matching=inst.matching)
        td = validate_tree_decomposition(inst.graph, inst.td)
        ok = ladder.valid and inst.ladder.length == lb_ladder_length(k, r) and td.valid and inst.td.width <= 2 * k
        passed += ok
        details[f"G({k},{r})"] = {
            "vertices": inst.graph.vertex_count, "ladder_length": inst.ladder.length, "td_width": inst.td.width, "ok": ok}
    return passed, len(LB_CASES), details


def ladder_multiplicativity() -> Outcome:
    checks = [(k, r) for k in range(1, 8) for r in range(1, 9 - k)]
    passed = sum(
        lb_ladder_length(k + 1, r + 1) == lb_ladder_length(k + 1, r) * lb_ladder_length(k, r + 1) for k, r in checks)
    return passed, len(checks), {}


def treewidth_wcol_bounds() -> Outcome:
    passed, worst = 0, []
    for seed, k, G, td in partial_ktree_instances():
        ok = True
        for rho in (1, 2):
            P = partition_from_tree_decomposition(G, td, rho)
            ok &= all(set_diameter(G, part, "weak") <= rho for part in P.parts)
            for x in (2, 4, 8):
                wcol = weak_reach_table(G, P, x * rho).wcol
                bound = evaluate_wcol_bound("treewidth", k=k + 1, x=x)
                ok &= wcol <= bound
                worst.append(wcol / bound)
        passed += ok
    return passed, 100, {"max_wcol_over_bound": max(worst)}


def minor_free_wcol_bounds() -> Outcome:
    rho, gamma, w = 4, Fraction(1, 5), 4
    validated, passed, failures = 0, 0, []
    for seed in range(20):
        rows, cols = 3 + seed % 6, 3 + (seed // 6) % 6
        G = gen_grid(rows, cols, (1, 1), seed)
        bcd, _ = heuristic_cop_decomposition(G, Fraction(rho, 4), 5)
        report = validate_buffered_cop_decomposition(G, bcd, Fraction(rho, 4), gamma, w)
        if not report.valid:
            failures.append({"seed": seed, "properties": report.properties})
            continue
        validated += 1
        P = partition_from_cop_decomposition(G, bcd, rho)
        ok = all(set_diameter(G, part, "strong") <= rho for part in P.parts)
        for x in (2, 4):
            ok &= weak_reach_table(G, P, x * rho).wcol <= evaluate_wcol_bound("minor_free", h=5, x=x)
        passed += ok
    return passed, validated, {"validated": validated, "required": 15, "failures": failures}


def sparse_covers() -> Outcome:
    passed, tolerance = 0, Fraction(1, 10 ** 9)
    for seed, k, G, td in partial_ktree_instances():
        rho, r = 1, 2
        P = partition_from_tree_decomposition(G, td, rho)
        cover = sparse_cover(G, P, r, rho)
        check = verify_cover(G, cover, tolerance)
        passed += check.covered and check.overlap_ok and check.blowup_ok
    return passed, 100, {}


def _direct_scatter(G, P: OrderedPartition, S: List[int], B: List[int], r) -> bool:
    allowed = remove_vertices(G, [v for i in S for v in P.parts[i]])
    return all(
        set_distance(G, P.parts[a], P.parts[b], restrict_to=allowed) > r
        for i, a in enumerate(B) for b in B[i + 1:])


def flatness_selection() -> Outcome:
    passed, total = 0, 0
    for seed, k, G, td in partial_ktree_instances(count=100, n=40):
        P = partition_from_tree_decomposition(G, td, 1)
        result = flatness(G, 2, P, 2, list(range(len(P.parts))))
        v = result.verification
        ok = v["s_size_ok"] and v["b_wreach_disjoint"] and v["b_scattered"]
        passed += ok and _direct_scatter(G, P, result.S, result.B, 2)
        total += 1

    # Stars of stars with unit weights: wcol_1 = 2 for the id order, so enough leaves meet (2mc)^(c+1)
    for m, branches, leaves in [(1, 8, 8), (2, 16, 32), (3, 45, 40)]:
        G = gen_star_of_stars(branches, leaves)
        P = OrderedPartition(parts=[[v] for v in G.vertices()])
        hubs = {1} | {1 + b * (leaves + 1) + 1 for b in range(branches)}
        A = [v - 1 for v in G.vertices() if v not in hubs]
        result = flatness(G, 1, P, m, A)
        v = result.verification
        ok = result.guarantees == "proved" and all(v.values())
        passed += ok and _direct_scatter(G, P, result.S, result.B, 1)
        total += 1
    return passed, total, {}


def ladder_oracles() -> Outcome:
    passed = 0
    for seed in range(50):
        n = 4 + seed % 3
        G = gen_random_graph(n, 0.6, (0.25, 2), seed)
        eps = (0.1, 0.3)[seed % 2]
        V = list(G.vertices())
        exact = brute_force_longest_ladder(G, V, V, eps, 1)
        oracle = exhaustive_longest_ladder(G, V, V, eps, 1)
        greedy = greedy_ladder(G, V, V, eps, 1)
        passed += exact.length == oracle.length and greedy.length <= exact.length and validate_ladder(G, exact).valid
    return passed, 50, {}


def coreset_instances():
    for seed in range(30):
        if seed % 2:
            G = gen_grid(4 + seed % 2, 5, (1, 3), seed)
        else:
            G, _ = gen_partial_ktree(20 + seed % 6, 3, 1.0, (1, 3), seed)
        k = 1 + seed % 2
        eps = (Fraction(1, 4), Fraction(1, 2))[(seed // 2) % 2]
        yield seed, gen_clustering_instance(G, k, seed, facilities=12), eps


def coreset_correctness() -> Outcome:
    passed, worst = 0, []
    for seed, inst, eps in coreset_instances():
        result = build_coreset(inst, eps)
        check = verify_coreset_bruteforce(inst, result.S, eps, inst.k)
        passed += check.ok
        worst.append(float(check.worst_ratio) / float(1 + eps))
    return passed, 30, {"max_ratio_over_allowed": max(worst)}


def coreset_structure() -> Outcome:
    passed, total = 0, 0
    for seed, inst, eps in coreset_instances():
        result = build_coreset(inst, eps)
        ok = result.verification.get("level_count_ok", True)
        for seq in result.levels:
            ok &= all(check_ladder_sequence(inst, seq, sequence_cap(inst.k, len(seq.pairs))).values())
        passed += ok
        total += 1
    eps = Fraction(1, 4)
    inst = counterexample_instance(5, eps)
    check = verify_coreset_bruteforce(inst, inst.clients[:-1], eps, 1)
    passed += check.worst_ratio == 1 + eps
    return passed, total + 1, {"counterexample_ratio": float(check.worst_ratio)}


def bound_oracle() -> Outcome:
    ok = verify_bounds()
    return int(ok), 1, {}


CRITERIA: List[Tuple[str, Callable[[], Outcome]]] = [
    ("lower-bound certificates", lower_bound_certificates),
    ("ladder multiplicativity", ladder_multiplicativity),
    ("treewidth wcol bounds", treewidth_wcol_bounds),
    ("minor-free wcol bounds", minor_free_wcol_bounds),
    ("sparse covers", sparse_covers),
    ("flatness", flatness_selection),
    ("ladder oracles", ladder_oracles),
    ("coreset correctness", coreset_correctness),
    ("coreset structure", coreset_structure),
    ("bound evaluators", bound_oracle),
]


def main():
    configure_logging("WARNING")
    rows = []
    details = {}
    for number, (name, run) in enumerate(CRITERIA, start=1):
        start = time.perf_counter()
        try:
            passed, total, info = run()
        except InvalidArgumentError as e:
            logger.error(f"Criterion {number} ({name}) raised: {e}")
            passed, total, info = 0, 1, {"error": str(e)}
        seconds = time.perf_counter() - start
        ok = passed == total
        if name == "minor-free wcol bounds":
            ok = ok and info["validated"] >= info["required"]
        rows.append({"criterion": number, "name": name, "passed": passed, "total": total, "ok": ok,
                     "seconds": round(seconds, 2)})
        details[name] = info
        print(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {passed}/{total} in {seconds:.1f}s")

    summary = pd.DataFrame(rows)
    print("\n=== EVALUATION SUMMARY ===")
    print(summary.to_string(index=False))
    print(f"\nCriteria met: {int(summary['ok'].sum())}/{len(summary)}, "
          f"mean pass rate {np.mean(summary['passed'] / summary['total']):.2f}")

    try:
        with open(RESULTS_PATH, "w") as f:
            json.dump({"summary": summary.to_dict(orient="records"), "details": details}, f, indent=2, default=str)
        print(f"Results saved to {RESULTS_PATH}")
    except OSError as e:
        print(f"Error saving results: {e}")
    return bool(summary["ok"].all())


if __name__ == "__main__":
    sys.exit(0 if main() else 1)

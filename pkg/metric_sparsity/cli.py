"""Command-line front end: one subcommand per operation, JSON run reports, exit codes 0/1/2."""
import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil
from pydantic import BaseModel, Field

from metric_sparsity import coreset as coreset_ops
from metric_sparsity.config import configure_logging
from metric_sparsity.covers import flat_scattered, sparse_cover, verify_cover
from metric_sparsity.decompositions import (
    heuristic_cop_decomposition,
    validate_buffered_cop_decomposition,
    validate_tree_decomposition,
)
from metric_sparsity.errors import InstanceTooLargeError, InvalidArgumentError, MetricSparsityError
from metric_sparsity.formats import (
    parse_vertex_list,
    read_bcd,
    read_graph,
    read_instance,
    read_ladder,
    read_matching,
    read_td,
    read_vertex_list,
    write_bcd,
    write_graph,
    write_ladder,
    write_matching,
    write_td,
)
from metric_sparsity.generators import gen_grid, gen_partial_ktree, gen_star_of_stars
from metric_sparsity.graph import WeightedGraph, exact_ratio, set_diameter
from metric_sparsity.ladders import (
    EpsLadder,
    brute_force_longest_ladder,
    dim_bound,
    greedy_ladder,
    validate_ladder,
)
from metric_sparsity.lowerbound import build_lb_instance, lb_ladder_length, lb_unweighted
from metric_sparsity.wcol import (
    OrderedPartition,
    as_fraction,
    evaluate_wcol_bound,
    partition_from_cop_decomposition,
    partition_from_tree_decomposition,
    weak_reach_table,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VERIFICATION_FAILED, EXIT_USAGE = 0, 1, 2


class RunReport(BaseModel):
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    outputs: Dict[str, Any] = Field(default_factory=dict)
    verification: Dict[str, bool] = Field(default_factory=dict)
    timings: Dict[str, float] = Field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(self.verification.values())


def _encode(value: Any) -> Any:
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, BaseModel):
        return value.model_dump()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def report_json(report: RunReport) -> str:
    return json.dumps(report.model_dump(), default=_encode, indent=2)


def _number(text: str):
    """Exact reading of integers, decimals and p/q fractions."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return value.numerator if value.denominator == 1 else value


# === PARTITION HELPERS ===

def _partition(args, G: WeightedGraph) -> Tuple[OrderedPartition, str]:
    """Partition from --td, --bcd or a heuristic decomposition for --h; returns the diameter mode it guarantees."""
    if args.td:
        return partition_from_tree_decomposition(G, read_td(args.td), args.rho), "weak"
    if args.bcd:
        bcd = read_bcd(args.bcd)
    else:
        bcd, _ = heuristic_cop_decomposition(G, exact_ratio(args.rho, 4), args.h)
    return partition_from_cop_decomposition(G, bcd, args.rho), "strong"


def _wcol_bound(args, td_bag_size: Optional[int], x) -> Optional[int]:
    if td_bag_size is not None:
        return evaluate_wcol_bound("treewidth", k=td_bag_size, x=x)
    if args.h is not None:
        return evaluate_wcol_bound("minor_free", h=args.h, x=x)
    return None


# === COMMANDS ===

def cmd_wcol(args, report: RunReport) -> None:
    G = read_graph(args.graph)
    P, mode = _partition(args, G)
    table = weak_reach_table(G, P, args.r)
    bag_size = read_td(args.td).max_bag_size if args.td else None
    x = as_fraction(args.r) / as_fraction(args.rho)
    bound = _wcol_bound(args, bag_size, x) if x > 1 else None
    report.outputs.update(
        parts=P.parts, order=P.owners, wreach_sizes=table.sizes, wcol=table.wcol,
        bound=bound, diameter_mode=mode)
    report.verification["diameters_ok"] = all(set_diameter(G, part, mode) <= args.rho for part in P.parts)
    if bound is not None:
        report.verification["bound_ok"] = table.wcol <= bound


def cmd_cover(args, report: RunReport) -> None:
    G = read_graph(args.graph)
    P, _ = _partition(args, G)
    cover = sparse_cover(G, P, args.r, args.rho)
    check = verify_cover(G, cover)
    report.outputs.update(cover.model_dump())
    report.verification.update(covered=check.covered, blowup_ok=check.blowup_ok, overlap_ok=check.overlap_ok)


def cmd_flat(args, report: RunReport) -> None:
    G = read_graph(args.graph)
    decomposition = read_bcd(args.bcd) if args.bcd else args.h
    result = flat_scattered(G, decomposition, args.r, args.rho, args.m, parse_vertex_list(args.A))
    report.outputs.update(
        S=result.S, B=result.B, partition_size=result.partition_size,
        guarantees=result.flatness.guarantees, c=result.flatness.c)
    report.verification["s_strong_diameter_ok"] = result.verification["s_strong_diameter_ok"]
    report.verification["b_scattered"] = result.verification["b_scattered"]
    if result.flatness.guarantees == "proved":
        report.verification["b_size_ok"] = result.verification["b_size_ok"]


def cmd_ladder(args, report: RunReport) -> None:
    G = read_graph(args.graph)
    centers = parse_vertex_list(args.centers) if args.centers else list(G.vertices())
    points = parse_vertex_list(args.points) if args.points else list(G.vertices())
    if args.mode == "validate":
        if not args.ladder:
            raise InvalidArgumentError("--mode validate needs --ladder")
        ladder = EpsLadder(epsilon=args.eps, width=args.r, pairs=read_ladder(args.ladder))
        matching = read_matching(args.matching) if args.matching else None
        check = validate_ladder(G, ladder, lb_extra=args.lb_extra, matching=matching)
        report.outputs.update(length=check.length, first_violation=check.first_violation)
        report.verification["valid"] = check.valid
        return
    search = greedy_ladder if args.mode == "greedy" else brute_force_longest_ladder
    ladder = search(G, centers, points, args.eps, args.r)
    report.outputs.update(length=ladder.length, pairs=ladder.pairs)
    report.verification["valid"] = validate_ladder(G, ladder).valid
    if args.out:
        write_ladder(ladder.pairs, args.out, args.eps, args.r)


def cmd_gen_lb(args, report: RunReport) -> None:
    if args.d == 2:
        inst = build_lb_instance(args.k, args.r, args.eps)
    else:
        inst = lb_unweighted(args.k, args.r, args.d)
    prefix = args.out
    write_graph(inst.graph, f"{prefix}.gr")
    write_td(inst.td, f"{prefix}.td", inst.graph.vertex_count)
    write_matching(inst.matching, f"{prefix}.matching")
    td_check = validate_tree_decomposition(inst.graph, inst.td)
    report.outputs.update(
        vertices=inst.graph.vertex_count, edges=len(inst.graph.edges), blocked_edges=len(inst.graph.blocked_edges),
        td_width=inst.td.width, levels=[lv.model_dump() for lv in inst.levels],
        files=[f"{prefix}.gr", f"{prefix}.td", f"{prefix}.matching"])
    report.verification.update(td_valid=td_check.valid, td_width_ok=inst.td.width <= 2 * args.k)
    if inst.ladder is not None:
        write_ladder(inst.ladder.pairs, f"{prefix}.ladder", inst.ladder.epsilon, inst.ladder.width)
        report.outputs["files"].append(f"{prefix}.ladder")
        report.outputs["ladder_length"] = inst.ladder.length
        check = validate_ladder(inst.graph, inst.ladder, lb_extra=True, matching=inst.matching)
        report.verification["ladder_valid"] = check.valid
        report.verification["ladder_length_ok"] = inst.ladder.length == lb_ladder_length(args.k, args.r)


def cmd_gen(args, report: RunReport) -> None:
    weights = (args.wmin, args.wmax)
    td = None
    if args.kind == "grid":
        G = gen_grid(args.rows, args.cols, weights, args.seed)
    elif args.kind == "ktree":
        G, td = gen_partial_ktree(args.n, args.k, args.keep, weights, args.seed)
    else:
        G = gen_star_of_stars(args.branches, args.leaves)
    write_graph(G, f"{args.out}.gr")
    files = [f"{args.out}.gr"]
    if td is not None:
        write_td(td, f"{args.out}.td", G.vertex_count)
        files.append(f"{args.out}.td")
        report.verification["td_valid"] = validate_tree_decomposition(G, td).valid
    report.outputs.update(vertices=G.vertex_count, edges=len(G.edges), files=files)


def cmd_coreset(args, report: RunReport) -> None:
    inst = read_instance(args.instance)
    result = coreset_ops.build_coreset(inst, args.eps, h=args.h)
    report.outputs.update(result.model_dump())
    for t, seq in enumerate(result.levels):
        cap = coreset_ops.sequence_cap(inst.k, len(seq.pairs))
        checks = coreset_ops.check_ladder_sequence(inst, seq, cap)
        report.verification[f"level_{t}_ok"] = all(checks.values())
    report.verification.update(result.verification)


def cmd_verify_coreset(args, report: RunReport) -> None:
    inst = read_instance(args.instance)
    S = read_vertex_list(args.coreset)
    check = coreset_ops.verify_coreset_bruteforce(inst, S, args.eps, args.kmax)
    report.outputs.update(check.model_dump())
    report.verification["ok"] = check.ok


def cmd_verify_td(args, report: RunReport) -> None:
    G = read_graph(args.graph)
    check = validate_tree_decomposition(G, read_td(args.td))
    report.outputs.update(width=check.width, violations=[v.model_dump() for v in check.violations])
    report.verification["valid"] = check.valid


def cmd_verify_bcd(args, report: RunReport) -> None:
    G = read_graph(args.graph)
    if args.bcd:
        bcd = read_bcd(args.bcd)
    else:
        bcd, achieved = heuristic_cop_decomposition(G, args.delta, args.h)
        report.outputs["achieved"] = achieved.model_dump()
        if args.out:
            write_bcd(bcd, args.out)
    check = validate_buffered_cop_decomposition(G, bcd, args.delta, args.gamma, args.w)
    report.outputs.update(
        supernodes=len(bcd.supernodes), properties=check.properties,
        violations=[v.model_dump() for v in check.violations[:20]])
    report.verification["valid"] = check.valid


BOUND_PARAMETERS = {
    "minor_free": ("h", "x"),
    "treewidth": ("k", "x"),
    "thm1": ("h", "eps"),
    "lemma4": ("c", "x"),
    "thm3": ("t", "r"),
}


def cmd_bounds(args, report: RunReport) -> None:
    missing = [f"--{name}" for name in BOUND_PARAMETERS[args.kind] if getattr(args, name) is None]
    if missing:
        raise InvalidArgumentError(f"bounds --kind {args.kind} needs {' '.join(missing)}")
    if args.kind in ("minor_free", "treewidth"):
        params = {"h": args.h} if args.kind == "minor_free" else {"k": args.k}
        value = evaluate_wcol_bound(args.kind, x=args.x, **params)
        report.outputs["value"] = value
        print(value)
        return
    if args.kind == "thm1":
        bound = dim_bound("thm1", h=args.h, epsilon=args.eps)
    elif args.kind == "lemma4":
        bound = dim_bound("lemma4", c=args.c, x=args.x, epsilon=args.eps)
    else:
        bound = dim_bound("thm3", t=args.t, r=args.r)
    # past the bit budget only log2 is reported
    report.outputs.update(value=bound.value, log2=bound.log2, exact=bound.exact)
    print(bound.value if bound.exact else f"2^{bound.log2:.6g}")


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunReport], None]] = {
    "wcol": cmd_wcol,
    "cover": cmd_cover,
    "flat": cmd_flat,
    "ladder": cmd_ladder,
    "gen-lb": cmd_gen_lb,
    "gen": cmd_gen,
    "coreset": cmd_coreset,
    "verify-coreset": cmd_verify_coreset,
    "verify-td": cmd_verify_td,
    "verify-bcd": cmd_verify_bcd,
    "bounds": cmd_bounds,
}


# === PARSER ===

def _add_partition_source(p: argparse.ArgumentParser, with_td: bool = True) -> None:
    source = p.add_mutually_exclusive_group(required=True)
    if with_td:
        source.add_argument("--td", help="PACE .td tree decomposition")
    source.add_argument("--bcd", help="buffered cop decomposition file")
    source.add_argument("--h", type=int, help="build a cop decomposition heuristically for K_h-minor-free input")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metric-sparsity", description="Metric sparsity toolbox")
    parser.add_argument("--json", help="write the run report here instead of stdout")
    # --json may follow the subcommand too; SUPPRESS leaves a top-level value in place
    report_option = argparse.ArgumentParser(add_help=False)
    report_option.add_argument("--json", default=argparse.SUPPRESS, help="write the run report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wcol", parents=[report_option], help="partition a graph and measure its weak coloring number")
    p.add_argument("--graph", required=True)
    p.add_argument("--rho", type=_number, required=True)
    p.add_argument("--r", type=_number, required=True)
    _add_partition_source(p)

    p = sub.add_parser("cover", parents=[report_option], help="sparse cover from a partition")
    p.add_argument("--graph", required=True)
    p.add_argument("--rho", type=_number, required=True)
    p.add_argument("--r", type=_number, required=True)
    _add_partition_source(p)

    p = sub.add_parser("flat", parents=[report_option], help="flatness on an rho-scattered vertex set")
    p.add_argument("--graph", required=True)
    p.add_argument("--rho", type=_number, required=True)
    p.add_argument("--r", type=_number, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--A", required=True, help="vertex ids: 1,2,5-9 or a file")
    _add_partition_source(p, with_td=False)

    p = sub.add_parser("ladder", parents=[report_option], help="validate or search for eps-ladders")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=_number, required=True)
    p.add_argument("--r", type=_number, required=True)
    p.add_argument("--mode", choices=["validate", "greedy", "brute"], required=True)
    p.add_argument("--ladder", help="ladder file to validate")
    p.add_argument("--matching", help="matching file the ladder pairs must come from")
    p.add_argument("--lb-extra", action="store_true", help="also require every cross distance to be at least r")
    p.add_argument("--centers")
    p.add_argument("--points")
    p.add_argument("--out", help="write the found ladder here")

    p = sub.add_parser("gen-lb", parents=[report_option], help="lower-bound graph G(k, r, d) with its certificates")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--eps", type=_number, default=Fraction(1, 10))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--out", required=True, help="output file prefix")

    p = sub.add_parser("gen", parents=[report_option], help="seeded random instances")
    p.add_argument("--kind", choices=["grid", "ktree", "star-of-stars"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--rows", type=int, default=5)
    p.add_argument("--cols", type=int, default=5)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--keep", type=float, default=1.0)
    p.add_argument("--wmin", type=float, default=1.0)
    p.add_argument("--wmax", type=float, default=1.0)
    p.add_argument("--branches", type=int, default=4)
    p.add_argument("--leaves", type=int, default=4)

    p = sub.add_parser("coreset", parents=[report_option], help="k-Center coreset")
    p.add_argument("--instance", required=True)
    p.add_argument("--eps", type=_number, required=True)
    p.add_argument("--h", type=int, help="K_h-minor-freeness, for the reported bounds")

    p = sub.add_parser("verify-coreset", parents=[report_option], help="brute-force coreset check")
    p.add_argument("--instance", required=True)
    p.add_argument("--coreset", required=True, help="file of client ids or a coreset JSON report")
    p.add_argument("--eps", type=_number, required=True)
    p.add_argument("--kmax", type=int, required=True)

    p = sub.add_parser("verify-td", parents=[report_option], help="validate a tree decomposition")
    p.add_argument("--graph", required=True)
    p.add_argument("--td", required=True)

    p = sub.add_parser(
        "verify-bcd", parents=[report_option], help="validate (or build and validate) a buffered cop decomposition")
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", type=_number, required=True)
    p.add_argument("--gamma", type=_number, required=True)
    p.add_argument("--w", type=int, required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--bcd")
    source.add_argument("--h", type=int)
    p.add_argument("--out", help="write the heuristic decomposition here")

    p = sub.add_parser("bounds", parents=[report_option], help="evaluate closed-form bounds")
    p.add_argument("--kind", choices=["minor_free", "treewidth", "thm1", "lemma4", "thm3"], required=True)
    p.add_argument("--h", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--x", type=_number)
    p.add_argument("--eps", type=_number)
    p.add_argument("--c", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--r", type=int)
    return parser


def run_command(argv: Sequence[str]) -> Tuple[Optional[RunReport], int]:
    """Parse and run one subcommand; returns the report and the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return None, EXIT_USAGE if e.code else EXIT_OK

    parameters = {k: v for k, v in vars(args).items() if k not in ("command", "json") and v is not None}
    report = RunReport(command=args.command, parameters=parameters, seed=getattr(args, "seed", None))
    start = time.perf_counter()
    try:
        COMMANDS[args.command](args, report)
    except (MetricSparsityError, FileNotFoundError) as e:
        if isinstance(e, InstanceTooLargeError):
            logger.error(f"Refusing oversized work: {e}")
        else:
            logger.error(f"{args.command} failed: {e}")
        return None, EXIT_USAGE
    except Exception:
        logger.exception(f"Unexpected error in {args.command}")
        raise
    report.timings["seconds"] = time.perf_counter() - start
    report.timings["rss_mb"] = psutil.Process().memory_info().rss / 2 ** 20

    text = report_json(report)
    if args.json:
        Path(args.json).write_text(text + "\n")
        logger.info(f"Report written to {args.json}")
    elif args.command != "bounds":
        print(text)
    if not report.passed:
        failed = [name for name, ok in report.verification.items() if not ok]
        logger.error(f"Verification failed: {failed}")
        return report, EXIT_VERIFICATION_FAILED
    return report, EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    configure_logging()
    _, code = run_command(sys.argv[1:] if argv is None else argv)
    sys.exit(code)


if __name__ == "__main__":
    main()

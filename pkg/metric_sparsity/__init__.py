"""Metric sparsity toolbox: weak coloring numbers, sparse covers, flatness, ε-ladders and k-Center coresets."""
from metric_sparsity.config import Settings, configure_logging, get_settings
from metric_sparsity.coreset import (
    ClusteringInstance,
    build_coreset,
    counterexample_instance,
    extend_sequence,
    greedy_kcenter_seed,
    sequence_length_bound,
    solve_lambda,
    verify_coreset_bruteforce,
)
from metric_sparsity.covers import flat_scattered, flatness, sparse_cover, verify_cover
from metric_sparsity.decompositions import (
    BufferedCopDecomposition,
    Supernode,
    TreeDecomposition,
    heuristic_cop_decomposition,
    validate_buffered_cop_decomposition,
    validate_tree_decomposition,
)
from metric_sparsity.errors import FormatError, InstanceTooLargeError, InvalidArgumentError, MetricSparsityError
from metric_sparsity.graph import WeightedGraph, ball, is_scattered, set_diameter, set_distance, sssp_distances
from metric_sparsity.ladders import (
    EpsLadder,
    brute_force_longest_ladder,
    dim_bound,
    evaluate_dim_bound,
    greedy_ladder,
    ladder_from_partition_probe,
    validate_ladder,
)
from metric_sparsity.lowerbound import build_lb_instance, lb_ladder_length, lb_unweighted, lb_vertex_count
from metric_sparsity.wcol import (
    OrderedPartition,
    evaluate_wcol_bound,
    partition_from_cop_decomposition,
    partition_from_tree_decomposition,
    weak_reach_table,
)

__version__ = "0.1.0"

__all__ = [
    "BufferedCopDecomposition",
    "ClusteringInstance",
    "EpsLadder",
    "FormatError",
    "InstanceTooLargeError",
    "InvalidArgumentError",
    "MetricSparsityError",
    "OrderedPartition",
    "Settings",
    "Supernode",
    "TreeDecomposition",
    "WeightedGraph",
    "ball",
    "brute_force_longest_ladder",
    "build_coreset",
    "build_lb_instance",
    "configure_logging",
    "counterexample_instance",
    "dim_bound",
    "evaluate_dim_bound",
    "evaluate_wcol_bound",
    "extend_sequence",
    "flat_scattered",
    "flatness",
    "get_settings",
    "greedy_kcenter_seed",
    "greedy_ladder",
    "heuristic_cop_decomposition",
    "is_scattered",
    "ladder_from_partition_probe",
    "lb_ladder_length",
    "lb_unweighted",
    "lb_vertex_count",
    "partition_from_cop_decomposition",
    "partition_from_tree_decomposition",
    "sequence_length_bound",
    "set_diameter",
    "set_distance",
    "solve_lambda",
    "sparse_cover",
    "sssp_distances",
    "validate_buffered_cop_decomposition",
    "validate_ladder",
    "verify_coreset_bruteforce",
    "verify_cover",
    "weak_reach_table",
]

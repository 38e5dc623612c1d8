import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metric_sparsity.coreset import (
    ClusteringInstance,
    LadderPair,
    LadderSequence,
    build_coreset,
    check_ladder_sequence,
    counterexample_instance,
    extend_sequence,
    gamma_cap,
    greedy_kcenter_seed,
    sequence_bound_log2,
    sequence_cap,
    sequence_length_bound,
    solve_lambda,
    sqrt_below,
    verify_coreset_bruteforce,
)
from metric_sparsity.errors import InstanceTooLargeError, InvalidArgumentError
from metric_sparsity.generators import gen_clustering_instance, gen_grid
from metric_sparsity.graph import distances_from
from tests.conftest import path_graph, star_graph

HALF = Fraction(1, 2)


def whole_path(n, k):
    V = list(range(1, n + 1))
    return ClusteringInstance(graph=path_graph(n), clients=V, facilities=V, k=k)


# === SEEDING ===

def test_seed_on_a_path():
    assert greedy_kcenter_seed(whole_path(5, 1)) == ([1], 4, 2)
    assert greedy_kcenter_seed(whole_path(5, 2)) == ([1, 5], 2, 2)


def test_seed_starts_from_the_lowest_facility():
    inst = ClusteringInstance(graph=star_graph(4), clients=[2, 3, 4, 5], facilities=[1, 2, 3, 4, 5], k=1)
    centers, radius, beta = greedy_kcenter_seed(inst)
    assert (centers, radius, beta) == ([1], 1, 2)
    assert type(radius) is int


def test_seed_factor_with_separate_facilities():
    inst = ClusteringInstance(graph=path_graph(5), clients=[1, 3, 5], facilities=[2, 4], k=2)
    centers, radius, beta = greedy_kcenter_seed(inst)
    assert beta == 3
    assert centers == [2, 4]
    assert radius == 1


def test_instance_checks_its_sets():
    with pytest.raises(ValueError):
        ClusteringInstance(graph=path_graph(5), clients=[9], facilities=[1], k=1)
    with pytest.raises(ValueError):
        ClusteringInstance(graph=path_graph(5), clients=[], facilities=[1], k=1)
    with pytest.raises(ValueError):
        ClusteringInstance(graph=path_graph(5), clients=[1], facilities=[1], k=0)


# === LADDER SEQUENCES ===

def test_extend_sequence_picks_the_first_far_client():
    inst = ClusteringInstance(graph=path_graph(5), clients=[1, 3, 5], facilities=[2, 4], k=1)
    assert extend_sequence(inst, [1], 1, Fraction(1, 5), 1) == ([2], 5)
    assert extend_sequence(inst, [1, 5], 1, Fraction(1, 5), 1) is None
    with pytest.raises(InvalidArgumentError):
        extend_sequence(inst, [1], 1, Fraction(1, 5), 0)


def test_check_ladder_sequence_flags_close_points():
    inst = whole_path(5, 1)
    bad = LadderSequence(radius=1, delta=Fraction(1, 5), pairs=[LadderPair(centers=[2], point=1)])
    assert not check_ladder_sequence(inst, bad, 1)["own_far"]
    good = LadderSequence(radius=1, delta=Fraction(1, 5), pairs=[
        LadderPair(centers=[4], point=1),
        LadderPair(centers=[2], point=5),
    ])
    assert all(check_ladder_sequence(inst, good, 1).values())
    assert not check_ladder_sequence(inst, good.model_copy(update={"radius": Fraction(1, 2)}), 1)["earlier_close"]


def test_sequence_cap_grows_with_length():
    assert sequence_cap(1, 0) == sequence_cap(1, 2) == 2
    assert sequence_cap(2, 3) == 6


@given(seed=st.integers(0, 10_000), k=st.integers(1, 2), scale=st.sampled_from([Fraction(1, 2), 1, Fraction(3, 2)]))
def test_stuck_sequence_has_no_valid_extension(seed, k, scale):
    inst = gen_clustering_instance(gen_grid(3, 3, (1, 3), seed), k, seed, facilities=6)
    radius = scale * greedy_kcenter_seed(inst)[1]
    delta = Fraction(1, 4)
    points = []
    while True:
        found = extend_sequence(inst, points, radius, delta, sequence_cap(k, len(points)))
        if found is None:
            break
        points.append(found[1])
    far = (1 + delta) * radius
    reach = {p: distances_from(inst.graph, [p]) for p in inst.clients}
    for size in range(1, k + 1):
        for X in itertools.combinations(inst.facilities, size):
            if all(min(reach[q][x] for x in X) <= radius for q in points):
                assert all(min(reach[p][x] for x in X) <= far for p in inst.clients if p not in points)


# === PIPELINE ===

def test_coreset_of_a_path_is_correct():
    inst = whole_path(5, 1)
    result = build_coreset(inst, HALF, h=2)
    assert {1, 5} <= set(result.S)
    assert set(result.Z) <= set(result.S)
    assert result.params.r_tilde == 4
    assert result.params.beta == 2
    assert result.params.c == 44928
    assert all(result.verification.values())
    for seq in result.levels:
        assert all(check_ladder_sequence(inst, seq, sequence_cap(inst.k, len(seq.pairs))).values())
    assert verify_coreset_bruteforce(inst, result.S, HALF, 1).ok


def test_radius_levels_stay_exact():
    params = build_coreset(whole_path(5, 1), HALF).params
    assert isinstance(params.delta, Fraction)
    assert (1 + params.delta) ** 2 <= 1 + HALF < (1 + params.delta + Fraction(1, 2 ** 32)) ** 2
    assert params.r_star == Fraction(4, 3)
    assert sqrt_below(4) == 2
    assert sqrt_below(Fraction(9, 4)) == Fraction(3, 2)
    assert sqrt_below(2) ** 2 <= 2 < (sqrt_below(2) + Fraction(1, 2 ** 32)) ** 2


def test_zero_radius_keeps_every_client():
    result = build_coreset(whole_path(3, 3), HALF)
    assert result.params.r_tilde == 0
    assert result.S == [1, 2, 3]
    assert result.levels == []


def test_coreset_rejects_bad_epsilon():
    with pytest.raises(InvalidArgumentError):
        build_coreset(whole_path(3, 1), 1)


@given(seed=st.integers(0, 10_000), k=st.integers(1, 2), eps=st.sampled_from([Fraction(1, 4), HALF]))
def test_coreset_on_small_grids(seed, k, eps):
    inst = gen_clustering_instance(gen_grid(3, 3, (1, 3), seed), k, seed, facilities=5)
    result = build_coreset(inst, eps)
    assert set(result.S) <= set(inst.clients)
    assert len(result.Z) <= k
    assert verify_coreset_bruteforce(inst, result.S, eps, k).ok


# === VERIFIER ===

def test_dropping_a_client_loses_the_epsilon_factor():
    eps = Fraction(1, 4)
    inst = counterexample_instance(4, eps)
    report = verify_coreset_bruteforce(inst, inst.clients[:-1], eps, 1)
    assert report.ok
    assert report.worst_ratio == Fraction(5, 4)
    assert report.witness == [8]
    assert report.subsets_checked == 4
    assert verify_coreset_bruteforce(inst, inst.clients, eps, 1).worst_ratio == 1


def test_verifier_argument_checks(fresh_settings):
    fresh_settings.setenv("MST_VERIFY_MAX_SUBSETS", "3")
    inst = counterexample_instance(4, Fraction(1, 4))
    with pytest.raises(InvalidArgumentError):
        verify_coreset_bruteforce(inst, [5], Fraction(1, 4), 1)
    with pytest.raises(InvalidArgumentError):
        verify_coreset_bruteforce(inst, [1], Fraction(1, 4), 0)
    with pytest.raises(InvalidArgumentError):
        counterexample_instance(2, Fraction(1, 4))
    with pytest.raises(InstanceTooLargeError):
        verify_coreset_bruteforce(inst, [1], Fraction(1, 4), 1)


# === BOUNDS ===

def test_sequence_length_bound():
    assert sequence_length_bound(1, 1, 1, HALF) == 2304
    assert sequence_bound_log2(1, 1, 1, HALF) == pytest.approx(2 * (1 + 1.584962500721156 + 3))


def test_lambda_is_a_capped_fixed_point():
    lam = solve_lambda(1, 1, HALF)
    assert lam == 17
    assert lam <= gamma_cap(1, 1, HALF) == 84
    assert sequence_bound_log2(1, lam, 1, HALF) <= lam

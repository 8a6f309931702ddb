import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_tsp_length, random_instance
from hetmmtsp import CapacityError, Instance, VehicleSpec, exact_tsp_held_karp, optimize_tour, tour_cost
from hetmmtsp.tourkit import (
    HELD_KARP_CAP,
    TourOptimizerBudget,
    nn_construct,
    or_opt_pass,
    subset_tour_lengths,
    tour_length,
    two_opt_pass,
)


def _square():
    # corners of the unit square; the depot sits on (0, 0)
    return Instance("sq", [(1, 0), (1, 1), (0, 1)], [VehicleSpec((0, 0))])


def test_nn_construct_examples():
    inst = Instance("c", [(3, 0), (1, 0), (2, 0)], [VehicleSpec((0, 0))])
    assert nn_construct(inst, 0, []) == []
    order = nn_construct(inst, 0, [0, 1, 2])
    assert order == [1, 2, 0]
    assert tour_cost(inst, 0, order) == pytest.approx(6.0)


def test_nn_construct_not_below_optimum(rng):
    for _ in range(20):
        inst = random_instance(rng, 5, 1)
        order = nn_construct(inst, 0, range(5))
        assert tour_cost(inst, 0, order) >= exact_tsp_held_karp(inst, 0, range(5)).cost - 1e-9


def test_two_opt_uncrosses_square():
    inst = _square()
    crossed = [1, 0, 2]
    assert tour_cost(inst, 0, crossed) == pytest.approx(2 + 2 * math.sqrt(2))
    new, improved = two_opt_pass(inst, 0, crossed)
    assert improved
    assert tour_cost(inst, 0, new) == pytest.approx(brute_tsp_length(inst, 0, [0, 1, 2]))
    assert tour_cost(inst, 0, new) == pytest.approx(4.0)


def test_two_opt_fixed_point():
    inst = _square()
    new, improved = two_opt_pass(inst, 0, [0, 1, 2])
    assert new == [0, 1, 2] and not improved


def test_two_opt_near_optimal_on_random_points():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        inst = random_instance(rng, 8, 1)
        order = rng.permutation(8).tolist()
        new, _ = two_opt_pass(inst, 0, order)
        assert sorted(new) == list(range(8))
        assert tour_cost(inst, 0, new) <= 1.25 * exact_tsp_held_karp(inst, 0, range(8)).cost


def test_or_opt_relocates_stray_target():
    pts = [(10, 0), (11, 0), (10, 1), (0, 10), (1, 10), (0, 11)]
    inst = Instance("or", pts, [VehicleSpec((0, 0))])
    stray = [0, 1, 3, 2, 4, 5]
    new, improved = or_opt_pass(inst, 0, stray)
    assert improved
    assert tour_cost(inst, 0, new) < tour_cost(inst, 0, stray)
    assert tour_cost(inst, 0, new) >= brute_tsp_length(inst, 0, range(6)) - 1e-9


def test_or_opt_fixed_points():
    inst = Instance("sq4", [(1, 0), (1, 1), (0, 1), (0.5, -0.5)], [VehicleSpec((0, 0))])
    best = exact_tsp_held_karp(inst, 0, range(4)).order
    assert or_opt_pass(inst, 0, best) == (best, False)
    assert or_opt_pass(inst, 0, []) == ([], False)
    assert or_opt_pass(inst, 0, [2]) == ([2], False)


def test_optimize_tour_small_sets_are_optimal(rng):
    for size in range(4):
        inst = random_instance(rng, size, 1)
        tour = optimize_tour(inst, 0, list(range(size)))
        assert sorted(tour.order) == list(range(size))
        assert tour.cost == pytest.approx(exact_tsp_held_karp(inst, 0, range(size)).cost, abs=1e-9)


def test_optimize_tour_within_five_percent():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        inst = random_instance(rng, 10, 1)
        got = optimize_tour(inst, 0, rng.permutation(10).tolist()).cost
        hits += got <= 1.05 * exact_tsp_held_karp(inst, 0, range(10)).cost
    assert hits >= 95


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 11))
def test_tour_improvers_invariants(seed, n):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, 1)
    order = rng.permutation(n).tolist()
    c0 = tour_cost(inst, 0, order)
    a, _ = two_opt_pass(inst, 0, order)
    b, _ = or_opt_pass(inst, 0, a)
    t = optimize_tour(inst, 0, order)
    for o in (a, b, t.order):
        assert sorted(o) == sorted(order)
    assert tour_cost(inst, 0, a) <= c0 + 1e-9
    assert tour_cost(inst, 0, b) <= tour_cost(inst, 0, a) + 1e-9
    assert t.cost <= c0 + 1e-9
    assert optimize_tour(inst, 0, t.order).cost == pytest.approx(t.cost, abs=1e-12)
    assert exact_tsp_held_karp(inst, 0, order).cost <= t.cost + 1e-9


def test_budget_validation():
    with pytest.raises(ValueError):
        TourOptimizerBudget(max_passes=0)


def test_held_karp_examples(rng):
    tri = random_instance(rng, 3, 1, speeds=False)
    pts = [tri.vehicles[0].depot, *tri.targets]
    perimeter = sum(math.dist(pts[i], pts[(i + 1) % 4]) for i in range(4))
    # with the depot as a fourth vertex, the best closed tour is at most any fixed cycle
    assert exact_tsp_held_karp(tri, 0, range(3)).cost <= perimeter + 1e-9
    assert exact_tsp_held_karp(tri, 0, range(3)).cost == pytest.approx(brute_tsp_length(tri, 0, [0, 1, 2]))
    assert exact_tsp_held_karp(_square(), 0, [0, 1, 2]).cost == pytest.approx(4.0)
    assert exact_tsp_held_karp(_square(), 0, []).cost == 0.0


def test_held_karp_three_targets_all_orders_equal():
    inst = Instance("t3", [(0, 0), (4, 0), (0, 3)], [VehicleSpec((0, 0), 2.0)])
    # depot coincides with target 0, so the tour is the 3-4-5 triangle
    assert exact_tsp_held_karp(inst, 0, [0, 1, 2]).cost == pytest.approx(12.0 / 2)


def test_held_karp_beats_random_permutations():
    rng = np.random.default_rng(7)
    inst = random_instance(rng, 8, 1)
    opt = exact_tsp_held_karp(inst, 0, range(8)).cost
    for _ in range(1000):
        assert opt <= tour_cost(inst, 0, rng.permutation(8).tolist()) + 1e-9


def test_held_karp_matches_permutation_brute_force(rng):
    for n in range(1, 8):
        inst = random_instance(rng, n, 1)
        tour = exact_tsp_held_karp(inst, 0, range(n))
        assert tour.cost == pytest.approx(brute_tsp_length(inst, 0, list(range(n))), rel=1e-12)
        assert tour.cost == pytest.approx(tour_cost(inst, 0, tour.order), rel=1e-12)


def test_held_karp_cap():
    inst = random_instance(np.random.default_rng(0), HELD_KARP_CAP + 1, 1)
    with pytest.raises(CapacityError):
        exact_tsp_held_karp(inst, 0, range(HELD_KARP_CAP + 1))
    with pytest.raises(CapacityError):
        subset_tour_lengths(inst, 0, list(range(HELD_KARP_CAP + 1)))


def test_subset_table_matches_exact(rng):
    inst = random_instance(rng, 7, 1)
    universe = [6, 2, 4, 0, 5]
    table = subset_tour_lengths(inst, 0, universe)
    for mask in range(1 << len(universe)):
        subset = [universe[b] for b in range(len(universe)) if mask >> b & 1]
        expect = exact_tsp_held_karp(inst, 0, subset).cost * inst.speed(0)
        assert table[mask] == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_tour_length_uses_speed(rng):
    inst = random_instance(rng, 5, 1)
    assert tour_length(inst, 0, [0, 1, 2]) == pytest.approx(tour_cost(inst, 0, [0, 1, 2]), rel=1e-12)

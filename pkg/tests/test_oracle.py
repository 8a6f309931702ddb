import itertools

import numpy as np
import pytest

from conftest import brute_tsp_length, random_instance
from hetmmtsp import (
    CapacityError,
    Instance,
    OracleLimit,
    VehicleSpec,
    brute_force_minmax,
    exact_tsp_held_karp,
    solve,
    validate_solution,
)


def test_all_required_single_branch(rng):
    inst = random_instance(rng, 6, 2, req_per=3)
    res = brute_force_minmax(inst)
    assert res.assignments == 1
    want = max(exact_tsp_held_karp(inst, j, inst.required(j)).cost for j in range(2))
    assert res.objective == pytest.approx(want)


def test_mirror_targets_split():
    inst = Instance("mirror", [(-5, 0), (5, 0)], [VehicleSpec((0, 0)), VehicleSpec((0, 0))])
    res = brute_force_minmax(inst)
    assert res.objective == pytest.approx(10.0)
    assert sorted(len(t.order) for t in res.solution.tours) == [1, 1]


def test_six_free_targets_beat_every_assignment():
    rng = np.random.default_rng(21)
    inst = random_instance(rng, 6, 2)
    res = brute_force_minmax(inst)
    assert res.assignments == 2 ** 6
    for labels in itertools.product(range(2), repeat=6):
        objective = max(
            brute_tsp_length(inst, j, [t for t in range(6) if labels[t] == j]) for j in range(2)
        )
        assert res.objective <= objective + 1e-9


def test_oracle_respects_required_and_is_valid():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        inst = random_instance(rng, 9, 3, req_per=1)
        res = brute_force_minmax(inst)
        assert validate_solution(inst, res.solution).ok
        assert res.assignments == 3 ** 6
        assert res.objective == pytest.approx(res.solution.objective)


def test_oracle_lower_bounds_heuristic():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        inst = random_instance(rng, 8, 2)
        assert brute_force_minmax(inst).objective <= solve(inst).objective + 1e-9


def test_cost_homogeneity(rng):
    inst = random_instance(rng, 7, 2)
    base = brute_force_minmax(inst).objective
    doubled = Instance("d", [(2 * p.x, 2 * p.y) for p in inst.targets],
                       [VehicleSpec((2 * v.depot.x, 2 * v.depot.y), v.speed) for v in inst.vehicles])
    faster = inst.with_vehicles([VehicleSpec(v.depot, 2 * v.speed) for v in inst.vehicles])
    assert brute_force_minmax(doubled).objective == pytest.approx(2 * base, rel=1e-12)
    assert brute_force_minmax(faster).objective == pytest.approx(base / 2, rel=1e-12)


def test_limits():
    inst = random_instance(np.random.default_rng(0), 11, 2)
    with pytest.raises(CapacityError):
        brute_force_minmax(inst)
    with pytest.raises(CapacityError):
        brute_force_minmax(random_instance(np.random.default_rng(0), 6, 2), OracleLimit(max_per_vehicle=5))
    with pytest.raises(ValueError):
        OracleLimit(max_free_targets=-1)

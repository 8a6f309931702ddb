import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetmmtsp import (
    Instance,
    InvalidInputError,
    Solution,
    Tour,
    VehicleSpec,
    make_solution,
    tour_cost,
    validate_solution,
)
from hetmmtsp.model import DENSE_MATRIX_LIMIT, edge_cost, route_length

coord = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)
speed = st.sampled_from([1.0, 1.25, 1.5, 1.75, 2.0])


def test_edge_cost_examples():
    assert edge_cost((0, 0), (3, 4), 1) == 5.0
    assert edge_cost((0, 0), (3, 4), 2) == 2.5
    assert edge_cost((7, 7), (7, 7), 1.25) == 0.0


@pytest.mark.parametrize("bad", [((math.nan, 0), (1, 1), 1), ((0, 0), (1, math.inf), 1), ((0, 0), (1, 1), 0)])
def test_edge_cost_rejects_bad_input(bad):
    with pytest.raises(InvalidInputError):
        edge_cost(*bad)


@given(point, point, speed)
def test_edge_cost_symmetric(a, b, v):
    assert edge_cost(a, b, v) == edge_cost(b, a, v)


@settings(max_examples=1000)
@given(point, point, point, speed)
def test_triangle_inequality(a, b, c, v):
    lhs = edge_cost(a, c, v)
    rhs = edge_cost(a, b, v) + edge_cost(b, c, v)
    assert lhs <= rhs * (1 + 1e-12) + 1e-9


def _line_instance(v=1.0):
    return Instance("t", [(0, 3), (4, 3)], [VehicleSpec((0, 0), v)])


def test_tour_cost_examples():
    inst = _line_instance()
    assert tour_cost(inst, 0, []) == 0.0
    assert tour_cost(inst, 0, [0, 1]) == pytest.approx(12.0, abs=1e-12)
    assert tour_cost(_line_instance(2.0), 0, [0, 1]) == pytest.approx(6.0, abs=1e-12)


@given(st.lists(point, min_size=1, max_size=9), point, speed, st.integers(0, 100))
def test_tour_cost_rotation_and_reversal(pts, dep, v, shift):
    inst = Instance("h", pts, [VehicleSpec(dep, v)])
    order = list(range(len(pts)))
    base = tour_cost(inst, 0, order)
    # the closed route is the cycle depot + order; rotate that cycle and drop the depot back to the front
    cycle = [-1] + order
    s = shift % len(cycle)
    rot = cycle[s:] + cycle[:s]
    d = rot.index(-1)
    rotated = rot[d + 1:] + rot[:d]
    assert tour_cost(inst, 0, rotated) == pytest.approx(base, rel=1e-12, abs=1e-9)
    assert tour_cost(inst, 0, order[::-1]) == pytest.approx(base, rel=1e-12, abs=1e-9)


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        VehicleSpec((0, 0), 0.0)
    with pytest.raises(InvalidInputError):
        VehicleSpec((0, math.nan))
    with pytest.raises(InvalidInputError):
        Instance("x", [(0, 0)], [])
    with pytest.raises(InvalidInputError, match="unknown target"):
        Instance("x", [(0, 0)], [VehicleSpec((0, 0), 1, {3})])
    with pytest.raises(InvalidInputError, match="vehicle 0 and vehicle 1"):
        Instance("x", [(0, 0), (1, 1)], [VehicleSpec((0, 0), 1, {1}), VehicleSpec((0, 0), 1, {1})])


def test_depot_may_coincide_with_target():
    inst = Instance("x", [(1, 1)], [VehicleSpec((1, 1))])
    sol = make_solution(inst, [[0]])
    assert sol.objective == 0.0
    assert validate_solution(inst, sol).ok


def test_dense_and_lazy_distances_agree():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 10, size=(DENSE_MATRIX_LIMIT, 2)).tolist()
    big = Instance("big", pts, [VehicleSpec((5, 5))])
    assert not isinstance(big.dist, list)
    small = Instance("small", pts[:50], [VehicleSpec((5, 5))])
    assert isinstance(small.dist, list)
    for a, b in [(0, 1), (10, 49), (3, 3)]:
        assert big.dist[a][b] == pytest.approx(small.dist[a][b], abs=1e-12)


def _two_vehicle():
    inst = Instance(
        "v",
        [(1, 0), (2, 0), (8, 0), (9, 0)],
        [VehicleSpec((0, 0), 1.0, {0}), VehicleSpec((10, 0), 1.25)],
    )
    return inst, make_solution(inst, [[0, 1], [2, 3]])


def test_validate_feasible():
    inst, sol = _two_vehicle()
    rep = validate_solution(inst, sol)
    assert rep.ok and bool(rep)
    assert sol.objective == pytest.approx(max(tour_cost(inst, j, t.order) for j, t in enumerate(sol.tours)), rel=1e-9)


def test_validate_duplicate():
    inst, sol = _two_vehicle()
    sol.tours[1] = Tour(1, [1, 2, 3], tour_cost(inst, 1, [1, 2, 3]))
    assert any(v.startswith("duplicate target 1") for v in validate_solution(inst, sol).violations)


def test_validate_required_breach():
    inst, _ = _two_vehicle()
    sol = make_solution(inst, [[1], [0, 2, 3]])
    assert any("required-assignment breach" in v for v in validate_solution(inst, sol).violations)


def test_validate_missing_and_drift():
    inst, sol = _two_vehicle()
    sol.tours[1] = Tour(1, [2], 123.0)
    msgs = validate_solution(inst, sol).violations
    assert any("missed target 3" in v for v in msgs)
    assert any("cost-cache drift on vehicle 1" in v for v in msgs)


def test_validate_structure_errors():
    inst, sol = _two_vehicle()
    assert not validate_solution(inst, Solution(sol.tours[:1]))
    sol.tours[1].vehicle = 0
    assert any("labelled" in v for v in validate_solution(inst, sol).violations)


def test_maximal_vehicle_tie_is_lowest_id():
    sol = Solution([Tour(0, [], 1.0), Tour(1, [], 3.0), Tour(2, [], 3.0)])
    assert sol.maximal_vehicle == 1
    assert sol.objective == 3.0


@given(st.lists(point, min_size=1, max_size=12), st.lists(st.tuples(point, speed), min_size=1, max_size=4), st.data())
def test_valid_solution_objective_matches_recomputation(pts, vehs, data):
    inst = Instance("p", pts, [VehicleSpec(d, v) for d, v in vehs])
    assign = data.draw(st.lists(st.integers(0, inst.k - 1), min_size=inst.n, max_size=inst.n))
    orders = [[t for t in range(inst.n) if assign[t] == j] for j in range(inst.k)]
    sol = make_solution(inst, orders)
    assert validate_solution(inst, sol).ok
    recomputed = max(tour_cost(inst, j, o) for j, o in enumerate(orders))
    assert sol.objective == pytest.approx(recomputed, rel=1e-9, abs=1e-12)
    assert route_length(inst.dist, inst.depot(0), orders[0]) >= 0

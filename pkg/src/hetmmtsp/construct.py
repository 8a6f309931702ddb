"""Initial feasible solutions: recursive cheapest insertion and speed-balanced assignment."""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .errors import InvalidMoveError
from .model import Instance, Solution, make_tour, route_length
from .tourkit import DEFAULT_BUDGET, TourOptimizerBudget, nn_construct, optimize_order


class ConstructionMethod(enum.Enum):
    RECURSIVE_INSERTION = "recursive"
    BALANCED_ASSIGNMENT = "balance"


def best_insertion(dist, depot: int, order: Sequence[int], t: int) -> tuple[float, int]:
    """Cheapest position for ``t`` in a route, in distance units (ties: lowest position).

    Position ``p`` means ``t`` ends up at ``order[p]``.  An empty route costs the
    out-and-back trip.
    """
    dt = dist[t]
    if not order:
        return 2.0 * dt[depot], 0
    best = dt[depot] + dt[order[0]] - dist[depot][order[0]]
    pos = 0
    prev = order[0]
    for p in range(1, len(order)):
        nxt = order[p]
        c = dt[prev] + dt[nxt] - dist[prev][nxt]
        if c < best:
            best, pos = c, p
        prev = nxt
    c = dt[prev] + dt[depot] - dist[prev][depot]
    if c < best:
        best, pos = c, len(order)
    return best, pos


def insertion_cost_single(inst: Instance, vehicle: int, order: Sequence[int], t: int) -> tuple[float, int]:
    """Cheapest insertion time of target ``t`` into the vehicle's tour and its position."""
    if t in order:
        raise InvalidMoveError(f"target {t} is already in the tour")
    cost, pos = best_insertion(inst.dist, inst.depot(vehicle), order, t)
    return cost / inst.speed(vehicle), pos


def _seed_tours(inst: Instance, budget: TourOptimizerBudget) -> list[list[int]]:
    orders = []
    for j, veh in enumerate(inst.vehicles):
        order = nn_construct(inst, j, veh.required)
        optimize_order(inst.dist, inst.depot(j), order, budget)
        orders.append(order)
    return orders


def recursive_insertion(inst: Instance, budget: TourOptimizerBudget = DEFAULT_BUDGET) -> Solution:
    """Grow the least-loaded tour by the globally cheapest free-target insertion.

    Insertion costs are cached per vehicle and refreshed incrementally: after
    ``t`` goes between ``a`` and ``b``, any other target's best position can
    only change if it pointed at edge ``(a, b)`` or now prefers ``(a, t)`` or
    ``(t, b)``.
    """
    dist = inst.dist
    orders = _seed_tours(inst, budget)
    lengths = [route_length(dist, inst.depot(j), o) for j, o in enumerate(orders)]
    costs = [lengths[j] / inst.speed(j) for j in range(inst.k)]
    free = inst.free_targets()
    # cache[j][t] = (cost, pos) for the current order of vehicle j
    cache: list[dict[int, tuple[float, int]] | None] = [None] * inst.k

    while free:
        j = min(range(inst.k), key=lambda i: (costs[i], i))
        depot = inst.depot(j)
        order = orders[j]
        table = cache[j]
        if table is None:
            table = {t: best_insertion(dist, depot, order, t) for t in free}
            cache[j] = table
        best_t = -1
        best_c = float("inf")
        best_p = 0
        for t in free:
            c, p = table[t]
            if c < best_c or (c == best_c and (t < best_t or (t == best_t and p < best_p))):
                best_t, best_c, best_p = t, c, p
        free.remove(best_t)
        order.insert(best_p, best_t)
        lengths[j] += best_c
        costs[j] = lengths[j] / inst.speed(j)
        del table[best_t]
        _refresh_after_insert(dist, depot, order, best_p, table)
    for j, order in enumerate(orders):
        optimize_order(dist, inst.depot(j), order, budget)
    return Solution([make_tour(inst, j, o) for j, o in enumerate(orders)])


def _refresh_after_insert(dist, depot: int, order: list[int], pos: int, table: dict) -> None:
    """Update cached best insertions after ``order[pos]`` was inserted."""
    t_new = order[pos]
    a = order[pos - 1] if pos > 0 else depot
    b = order[pos + 1] if pos + 1 < len(order) else depot
    dnew = dist[t_new]
    for s, (c, p) in table.items():
        if p == pos:
            # the old best edge (a, b) no longer exists
            table[s] = best_insertion(dist, depot, order, s)
            continue
        shifted = p + 1 if p > pos else p
        ds = dist[s]
        c1 = ds[a] + ds[t_new] - dist[a][t_new]
        c2 = ds[t_new] + ds[b] - dnew[b]
        best_c, best_p = c, shifted
        # positions pos and pos+1 are the new edges; keep lowest-position tie-break
        if c1 < best_c or (c1 == best_c and pos < best_p):
            best_c, best_p = c1, pos
        if c2 < best_c or (c2 == best_c and pos + 1 < best_p):
            best_c, best_p = c2, pos + 1
        table[s] = (best_c, best_p)


def speed_quotas(n_free: int, speeds: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of ``n_free`` targets proportional to speed."""
    total = float(sum(speeds))
    raw = [n_free * v / total for v in speeds]
    quotas = [int(np.floor(r)) for r in raw]
    short = n_free - sum(quotas)
    by_remainder = sorted(range(len(speeds)), key=lambda j: (-(raw[j] - quotas[j]), j))
    for j in by_remainder[:short]:
        quotas[j] += 1
    return quotas


def min_cost_transportation(cost: np.ndarray, capacity: Sequence[int]) -> list[int]:
    """Assign each row (unit supply) to a column respecting column capacities at minimum cost.

    Successive shortest augmenting paths: rows are added one at a time and the
    cheapest path row -> column [-> assigned row -> column ...] -> free capacity
    is found with Bellman-Ford over the columns, whose residual arcs
    ``a -> b`` cost ``min over rows r in a of cost[r, b] - cost[r, a]``.
    Returns the column index per row.
    """
    cost = np.asarray(cost, dtype=float)
    n_rows, n_cols = cost.shape
    cap = list(capacity)
    if sum(cap) < n_rows:
        raise ValueError("total capacity below supply")
    assign = np.full(n_rows, -1, dtype=int)
    members: list[list[int]] = [[] for _ in range(n_cols)]
    for r in range(n_rows):
        # residual arcs between columns
        arc = np.full((n_cols, n_cols), np.inf)
        via = np.full((n_cols, n_cols), -1, dtype=int)
        for a in range(n_cols):
            if members[a]:
                rows = np.array(members[a])
                red = cost[rows] - cost[rows, a][:, None]
                idx = red.argmin(axis=0)
                arc[a] = red[idx, np.arange(n_cols)]
                via[a] = rows[idx]
        np.fill_diagonal(arc, np.inf)
        label = cost[r].copy()
        pred = np.full(n_cols, -1, dtype=int)
        for _ in range(n_cols):
            cand = label[:, None] + arc
            src = cand.argmin(axis=0)
            best = cand[src, np.arange(n_cols)]
            better = best < label
            if not better.any():
                break
            label[better] = best[better]
            pred[better] = src[better]
        open_cols = [c for c in range(n_cols) if len(members[c]) < cap[c]]
        end = min(open_cols, key=lambda c: (label[c], c))
        # walk the path backwards, shifting one row per arc
        col = end
        while pred[col] != -1:
            src = pred[col]
            moved = via[src, col]
            members[src].remove(moved)
            members[col].append(moved)
            assign[moved] = col
            col = src
        members[col].append(r)
        assign[r] = col
    return assign.tolist()


def balanced_assignment_construct(inst: Instance, budget: TourOptimizerBudget = DEFAULT_BUDGET) -> Solution:
    """Depot-distance assignment with per-vehicle quotas proportional to speed."""
    free = inst.free_targets()
    speeds = [v.speed for v in inst.vehicles]
    quotas = speed_quotas(len(free), speeds)
    members: list[list[int]] = [sorted(v.required) for v in inst.vehicles]
    if free:
        dist = inst.dist
        cost = np.array(
            [[dist[inst.depot(j)][t] / speeds[j] for j in range(inst.k)] for t in free], dtype=float
        )
        for t, j in zip(free, min_cost_transportation(cost, quotas)):
            members[j].append(t)
    orders = []
    for j, targets in enumerate(members):
        order = nn_construct(inst, j, targets)
        optimize_order(inst.dist, inst.depot(j), order, budget)
        orders.append(order)
    return Solution([make_tour(inst, j, o) for j, o in enumerate(orders)])


def construct(inst: Instance, method: ConstructionMethod, budget: TourOptimizerBudget = DEFAULT_BUDGET) -> Solution:
    if method is ConstructionMethod.RECURSIVE_INSERTION:
        return recursive_insertion(inst, budget)
    return balanced_assignment_construct(inst, budget)

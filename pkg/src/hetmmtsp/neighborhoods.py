"""Local-search neighborhoods acting on the maximal vehicle.

All three searches share one acceptance rule: a tentative move is judged on
*estimated* tour times carried through savings / insertion deltas (and
2-opt deltas for the multi-target swap).  Only when the estimated maximum
tour time beats the incumbent are the two touched tours re-optimized and
the move committed.  Because every estimate is an exact tour time and the
tour optimizer never lengthens a tour, a committed move strictly lowers the
objective.

Internally lengths are in distance units and converted to time by dividing
by the vehicle speed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .construct import best_insertion
from .errors import InvalidMoveError
from .model import Instance, Solution, make_tour
from .tourkit import DEFAULT_BUDGET, TourOptimizerBudget, _two_opt, optimize_order

#: called as probe(vehicle, tentative_order, estimated_time) for every tentative tour state
Probe = Callable[[int, list[int], float], None]


class VehicleSortMetric(enum.Enum):
    LEAST_ACTUAL_TOUR = "actual"
    LEAST_INSERTION_COST = "insertion"
    LEAST_ESTIMATED_TOUR = "estimated"


class Structure(enum.Enum):
    FIXED = "fixed"
    VARIABLE = "variable"


class FixedSort(enum.Enum):
    INSERTION_COST = "insertion"
    SAVINGS_MINUS_INSERTION = "savings-minus-insertion"


class GroupInsertion(enum.Enum):
    GROUP_EDGE = "group"
    RECURSIVE = "recursive"


@dataclass(frozen=True)
class SwitchSwapConfig:
    metric: VehicleSortMetric = VehicleSortMetric.LEAST_INSERTION_COST
    n_vehicles: int = 2

    def __post_init__(self):
        if self.n_vehicles < 1:
            raise ValueError("n_vehicles must be >= 1")


@dataclass(frozen=True)
class MultiSwapConfig:
    structure: Structure = Structure.FIXED
    m: int = 2
    n_candidates: int = 20
    fixed_sort: FixedSort = FixedSort.INSERTION_COST
    variable_insertion: GroupInsertion = GroupInsertion.GROUP_EDGE

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("group size m must be >= 2")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")


@dataclass
class MoveOutcome:
    improved: bool
    solution: Solution


# ---------------------------------------------------------------------------
# metrics


def _removal_delta(dist, depot: int, order: Sequence[int], pos: int) -> float:
    prev = order[pos - 1] if pos > 0 else depot
    nxt = order[pos + 1] if pos + 1 < len(order) else depot
    t = order[pos]
    return dist[prev][t] + dist[t][nxt] - dist[prev][nxt]


def savings(inst: Instance, vehicle: int, order: Sequence[int], t: int) -> float:
    """Tour-time decrease from dropping ``t`` and joining its two neighbours."""
    try:
        pos = list(order).index(t)
    except ValueError:
        raise InvalidMoveError(f"target {t} is not in the tour") from None
    return _removal_delta(inst.dist, inst.depot(vehicle), order, pos) / inst.speed(vehicle)


def estimated_cost_after_insert(prev_cost: float, ins_cost: float) -> float:
    return prev_cost + ins_cost


def estimated_cost_after_remove(prev_cost: float, sav: float) -> float:
    return prev_cost - sav


def _group_removal_delta(dist, depot: int, order: Sequence[int], positions: Sequence[int]) -> float:
    """Sum of single-target savings removing ``positions`` one after the other."""
    cur = list(order)
    total = 0.0
    for p in sorted(positions, reverse=True):
        total += _removal_delta(dist, depot, cur, p)
        del cur[p]
    return total


def _without(order: Sequence[int], positions: Sequence[int]) -> list[int]:
    drop = set(positions)
    return [t for p, t in enumerate(order) if p not in drop]


def _group_positions(inst: Instance, vehicle: int, order: Sequence[int], group: Sequence[int]) -> list[int]:
    """Tour positions of ``group``; it must be contiguous apart from the vehicle's required targets."""
    index = {t: p for p, t in enumerate(order)}
    try:
        positions = sorted(index[t] for t in group)
    except KeyError as exc:
        raise InvalidMoveError(f"target {exc.args[0]} is not in the tour") from None
    if len(set(positions)) != len(positions):
        raise InvalidMoveError("group lists a target twice")
    members = set(group)
    req = inst.required(vehicle)
    for p in range(positions[0], positions[-1] + 1):
        t = order[p]
        if t not in members and t not in req:
            raise InvalidMoveError(f"group is not consecutive: target {t} sits inside it")
    return positions


def group_savings(inst: Instance, vehicle: int, order: Sequence[int], group: Sequence[int]) -> float:
    """Tour-time decrease from removing a consecutive group of targets."""
    positions = _group_positions(inst, vehicle, order, group)
    return _group_removal_delta(inst.dist, inst.depot(vehicle), order, positions) / inst.speed(vehicle)


def _group_insert(dist, depot: int, order: Sequence[int], group: Sequence[int]) -> tuple[float, int, bool]:
    """Cheapest splice of ``group`` as a block: (length delta, position, reversed)."""
    g0, gl = group[0], group[-1]
    internal = 0.0
    for a, b in zip(group, group[1:]):
        internal += dist[a][b]
    d0, dl = dist[g0], dist[gl]
    route = [depot, *order, depot]
    best = math.inf
    best_pos, best_rev = 0, False
    for p in range(len(route) - 1):
        u, w = route[p], route[p + 1]
        base = internal - dist[u][w]
        fwd = d0[u] + dl[w] + base
        if fwd < best:
            best, best_pos, best_rev = fwd, p, False
        rev = dl[u] + d0[w] + base
        if rev < best:
            best, best_pos, best_rev = rev, p, True
    return best, best_pos, best_rev


def _splice(order: Sequence[int], group: Sequence[int], pos: int, reverse: bool) -> list[int]:
    block = list(reversed(group)) if reverse else list(group)
    return list(order[:pos]) + block + list(order[pos:])


def group_insertion_cost(
    inst: Instance, vehicle: int, order: Sequence[int], group: Sequence[int]
) -> tuple[float, int, bool]:
    """Cheapest block insertion of ``group``: (time, position, reversed).

    Ties go to the lower position, then to the forward orientation.
    """
    if not group:
        raise InvalidMoveError("group must be nonempty")
    if set(group) & set(order):
        raise InvalidMoveError("group overlaps the tour")
    cost, pos, rev = _group_insert(inst.dist, inst.depot(vehicle), order, group)
    return cost / inst.speed(vehicle), pos, rev


def _removal_ratio(dist, depot: int, order: Sequence[int], positions: Sequence[int]) -> float:
    first, last = positions[0], positions[-1]
    prev = order[first - 1] if first > 0 else depot
    nxt = order[last + 1] if last + 1 < len(order) else depot
    inner = 0.0
    for a, b in zip(positions, positions[1:]):
        inner += dist[order[a]][order[b]]
    outer = dist[prev][order[first]] + dist[order[last]][nxt]
    if inner == 0.0:
        return math.inf
    return outer / inner


def removal_ratio(inst: Instance, vehicle: int, order: Sequence[int], group: Sequence[int]) -> float:
    """Entry-plus-exit edge length of a consecutive group over its internal path length.

    Dimensionless.  A group whose members all coincide has no internal length and
    ranks first (``inf``).
    """
    if len(group) < 2:
        raise InvalidMoveError("removal ratio needs a group of at least two targets")
    positions = _group_positions(inst, vehicle, order, group)
    return _removal_ratio(inst.dist, inst.depot(vehicle), order, positions)


def _recursive_insert(dist, depot: int, order: Sequence[int], group: Sequence[int]) -> tuple[float, list[int]]:
    cur = list(order)
    total = 0.0
    for t in group:
        c, p = best_insertion(dist, depot, cur, t)
        cur.insert(p, t)
        total += c
    return total, cur


def recursive_group_insertion_cost(
    inst: Instance, vehicle: int, order: Sequence[int], group: Sequence[int]
) -> float:
    """Time added by inserting the group members one after the other, each at its cheapest spot."""
    if set(group) & set(order):
        raise InvalidMoveError("group overlaps the tour")
    total, _ = _recursive_insert(inst.dist, inst.depot(vehicle), order, group)
    return total / inst.speed(vehicle)


def _rank_vehicles(
    inst: Instance, sol: Solution, metric: VehicleSortMetric, t: int, candidates: Sequence[int]
) -> list[tuple[int, float, int]]:
    """Candidates sorted by ``metric``; each entry is (vehicle, insertion time, position)."""
    dist = inst.dist
    ranked = []
    for j in candidates:
        tour = sol.tours[j]
        c, p = best_insertion(dist, inst.depot(j), tour.order, t)
        ins = c / inst.speed(j)
        if metric is VehicleSortMetric.LEAST_ACTUAL_TOUR:
            key = tour.cost
        elif metric is VehicleSortMetric.LEAST_INSERTION_COST:
            key = ins
        else:
            key = estimated_cost_after_insert(tour.cost, ins)
        ranked.append((key, j, ins, p))
    ranked.sort(key=lambda r: (r[0], r[1]))
    return [(j, ins, p) for _, j, ins, p in ranked]


def sort_vehicles(metric: VehicleSortMetric, t: int, sol: Solution, inst: Instance, exclude: int) -> list[int]:
    """Vehicles other than ``exclude`` in the order they are tried for taking target ``t``."""
    others = [j for j in range(inst.k) if j != exclude]
    return [j for j, _, _ in _rank_vehicles(inst, sol, metric, t, others)]


# ---------------------------------------------------------------------------
# shared helpers


def _max_excluding(costs: Sequence[float], i: int, j: int) -> float:
    best = -math.inf
    for v, c in enumerate(costs):
        if v != i and v != j and c > best:
            best = c
    return best


def _commit(
    inst: Instance, sol: Solution, changes: dict[int, list[int]], budget: TourOptimizerBudget, bound: float
) -> Solution | None:
    """Re-optimize the touched tours; return the new solution if it beats ``bound``."""
    new = sol.copy()
    for j, order in changes.items():
        order = list(order)
        optimize_order(inst.dist, inst.depot(j), order, budget)
        new.tours[j] = make_tour(inst, j, order)
    if new.objective < bound:
        return new
    return None


def _has_free_target(inst: Instance, order: Sequence[int]) -> int:
    owner = inst.owner
    return sum(1 for t in order if owner[t] == -1)


def _windows(inst: Instance, order: Sequence[int], size: int, blocked: frozenset[int] = frozenset()) -> list[tuple[int, ...]]:
    """Position tuples of ``size`` movable targets that are consecutive up to required targets.

    Movable means not required by anyone and not in ``blocked``.  Required
    targets may sit between members; blocked targets break a run.
    """
    owner = inst.owner
    runs: list[list[int]] = [[]]
    for p, t in enumerate(order):
        if t in blocked:
            runs.append([])
        elif owner[t] == -1:
            runs[-1].append(p)
    out = []
    for run in runs:
        for s in range(len(run) - size + 1):
            out.append(tuple(run[s:s + size]))
    return out


# ---------------------------------------------------------------------------
# neighborhood 1: target switch


def neighborhood_switch(
    sol: Solution,
    inst: Instance,
    cfg: SwitchSwapConfig = SwitchSwapConfig(),
    budget: TourOptimizerBudget = DEFAULT_BUDGET,
    probe: Probe | None = None,
) -> MoveOutcome:
    """Move one target from the maximal vehicle to another vehicle."""
    dist = inst.dist
    i = sol.maximal_vehicle
    obj = sol.objective
    order_i = sol.tours[i].order
    dep_i, v_i = inst.depot(i), inst.speed(i)
    costs = sol.costs()
    others = [j for j in range(inst.k) if j != i]

    cands = []
    for pos, t in enumerate(order_i):
        if inst.owner[t] == -1:
            cands.append((-_removal_delta(dist, dep_i, order_i, pos) / v_i, t, pos))
    cands.sort()

    for neg_sav, t, pos in cands:
        est_i = estimated_cost_after_remove(costs[i], -neg_sav)
        new_i = None
        for j, ins, p in _rank_vehicles(inst, sol, cfg.metric, t, others)[: cfg.n_vehicles]:
            est_j = estimated_cost_after_insert(costs[j], ins)
            order_j = sol.tours[j].order
            if probe is not None:
                new_i = new_i or order_i[:pos] + order_i[pos + 1:]
                probe(i, list(new_i), est_i)
                probe(j, order_j[:p] + [t] + order_j[p:], est_j)
            if max(est_i, est_j, _max_excluding(costs, i, j)) < obj:
                new_i = order_i[:pos] + order_i[pos + 1:]
                new_j = order_j[:p] + [t] + order_j[p:]
                out = _commit(inst, sol, {i: new_i, j: new_j}, budget, obj)
                if out is not None:
                    return MoveOutcome(True, out)
    return MoveOutcome(False, sol)


# ---------------------------------------------------------------------------
# neighborhood 2: target swap


def neighborhood_swap(
    sol: Solution,
    inst: Instance,
    cfg: SwitchSwapConfig = SwitchSwapConfig(),
    budget: TourOptimizerBudget = DEFAULT_BUDGET,
    probe: Probe | None = None,
) -> MoveOutcome:
    """Exchange one target of the maximal vehicle for one target of another vehicle."""
    dist = inst.dist
    owner = inst.owner
    i = sol.maximal_vehicle
    obj = sol.objective
    order_i = sol.tours[i].order
    dep_i, v_i = inst.depot(i), inst.speed(i)
    costs = sol.costs()
    eligible = [j for j in range(inst.k) if j != i and _has_free_target(inst, sol.tours[j].order)]
    if not eligible:
        return MoveOutcome(False, sol)

    cands = []
    for pos, t in enumerate(order_i):
        if owner[t] == -1:
            cands.append((-_removal_delta(dist, dep_i, order_i, pos) / v_i, t, pos))
    cands.sort()

    for neg_sav, t, pos in cands:
        sav_t = -neg_sav
        order_i_minus = order_i[:pos] + order_i[pos + 1:]
        base_i = estimated_cost_after_remove(costs[i], sav_t)
        # cheapest insertion of each candidate return target into i's reduced tour
        ins_into_i: dict[int, tuple[float, int]] = {}
        for j, ins_t, p in _rank_vehicles(inst, sol, cfg.metric, t, eligible)[: cfg.n_vehicles]:
            dep_j, v_j = inst.depot(j), inst.speed(j)
            order_j_plus = sol.tours[j].order[:p] + [t] + sol.tours[j].order[p:]
            base_j = estimated_cost_after_insert(costs[j], ins_t)
            returns = []
            for tj in sol.tours[j].order:
                if owner[tj] != -1:
                    continue
                if tj not in ins_into_i:
                    c, q = best_insertion(dist, dep_i, order_i_minus, tj)
                    ins_into_i[tj] = (c / v_i, q)
                c, q = ins_into_i[tj]
                returns.append((c, tj, q))
            returns.sort()
            if sav_t < returns[0][0]:
                continue
            rest = _max_excluding(costs, i, j)
            for ins_tj, tj, q in returns:
                if sav_t < ins_tj:
                    # sorted ascending: every later candidate also lengthens tour i
                    break
                est_i = estimated_cost_after_insert(base_i, ins_tj)
                pj = order_j_plus.index(tj)
                est_j = estimated_cost_after_remove(base_j, _removal_delta(dist, dep_j, order_j_plus, pj) / v_j)
                if probe is not None:
                    probe(i, order_i_minus[:q] + [tj] + order_i_minus[q:], est_i)
                    probe(j, order_j_plus[:pj] + order_j_plus[pj + 1:], est_j)
                if max(est_i, est_j, rest) < obj:
                    new_i = order_i_minus[:q] + [tj] + order_i_minus[q:]
                    new_j = order_j_plus[:pj] + order_j_plus[pj + 1:]
                    out = _commit(inst, sol, {i: new_i, j: new_j}, budget, obj)
                    if out is not None:
                        return MoveOutcome(True, out)
    return MoveOutcome(False, sol)


# ---------------------------------------------------------------------------
# neighborhood 3: multi-target swap


def _try_return_groups(
    inst: Instance,
    sol: Solution,
    i: int,
    j: int,
    oi: list[int],
    oj: list[int],
    est_i: float,
    est_j: float,
    candidates: list,
    n_candidates: int,
    budget: TourOptimizerBudget,
    probe: Probe | None,
) -> Solution | None:
    """Evaluate the top return groups from ``j`` into ``i``; commit the first improving one.

    Each candidate is (sort key, positions in ``oj``, savings time, insertion
    time, new order for ``i``).
    """
    dist = inst.dist
    dep_i, dep_j = inst.depot(i), inst.depot(j)
    v_i, v_j = inst.speed(i), inst.speed(j)
    obj = sol.objective
    rest = _max_excluding(sol.costs(), i, j)
    for _, win, sav_h, ins_h, oi2 in candidates[:n_candidates]:
        oi2 = list(oi2)
        oj2 = _without(oj, win)
        ei = est_i + ins_h
        ej = est_j - sav_h
        if probe is not None:
            probe(i, list(oi2), ei)
            probe(j, list(oj2), ej)
        ei += _two_opt(dist, dep_i, oi2) / v_i
        ej += _two_opt(dist, dep_j, oj2) / v_j
        if probe is not None:
            probe(i, list(oi2), ei)
            probe(j, list(oj2), ej)
        if max(ei, ej, rest) < obj:
            out = _commit(inst, sol, {i: oi2, j: oj2}, budget, obj)
            if out is not None:
                return out
    return None


def neighborhood_multiswap_fixed(
    sol: Solution,
    inst: Instance,
    cfg: MultiSwapConfig = MultiSwapConfig(),
    budget: TourOptimizerBudget = DEFAULT_BUDGET,
    probe: Probe | None = None,
) -> MoveOutcome:
    """Swap ``m`` consecutive targets of the maximal vehicle for ``m-1`` or ``m`` of another."""
    if cfg.structure is not Structure.FIXED:
        raise ValueError("fixed-structure search needs a FIXED config")
    dist = inst.dist
    m = cfg.m
    i = sol.maximal_vehicle
    order_i = sol.tours[i].order
    dep_i, v_i = inst.depot(i), inst.speed(i)
    costs = sol.costs()
    movable = [j for j in range(inst.k) if j != i and _has_free_target(inst, sol.tours[j].order) >= m - 1]

    groups = []
    for win in _windows(inst, order_i, m):
        sav = _group_removal_delta(dist, dep_i, order_i, win) / v_i
        groups.append((-sav, win))
    groups.sort()

    for neg_sav, win in groups:
        group = [order_i[p] for p in win]
        best = None
        for j in movable:
            c, p, rev = _group_insert(dist, inst.depot(j), sol.tours[j].order, group)
            c /= inst.speed(j)
            if best is None or c < best[0]:
                best = (c, j, p, rev)
        if best is None:
            continue
        ins, j, p, rev = best
        dep_j, v_j = inst.depot(j), inst.speed(j)
        oi = _without(order_i, win)
        oj = _splice(sol.tours[j].order, group, p, rev)
        est_i = estimated_cost_after_remove(costs[i], -neg_sav)
        est_j = estimated_cost_after_insert(costs[j], ins)
        if probe is not None:
            probe(i, list(oi), est_i)
            probe(j, list(oj), est_j)
        est_i += _two_opt(dist, dep_i, oi) / v_i
        est_j += _two_opt(dist, dep_j, oj) / v_j
        if probe is not None:
            probe(i, list(oi), est_i)
            probe(j, list(oj), est_j)

        blocked = frozenset(group)
        cands = []
        for size in (m - 1, m):
            for w in _windows(inst, oj, size, blocked):
                h = [oj[q] for q in w]
                sav_h = _group_removal_delta(dist, dep_j, oj, w) / v_j
                c, q, r = _group_insert(dist, dep_i, oi, h)
                ins_h = c / v_i
                if cfg.fixed_sort is FixedSort.INSERTION_COST:
                    key = ins_h
                else:
                    key = -(sav_h - ins_h)
                cands.append(((key, size, w), w, sav_h, ins_h, _splice(oi, h, q, r)))
        cands.sort(key=lambda c: c[0])
        out = _try_return_groups(inst, sol, i, j, oi, oj, est_i, est_j, cands, cfg.n_candidates, budget, probe)
        if out is not None:
            return MoveOutcome(True, out)
    return MoveOutcome(False, sol)


def neighborhood_multiswap_variable(
    sol: Solution,
    inst: Instance,
    cfg: MultiSwapConfig = MultiSwapConfig(structure=Structure.VARIABLE, m=3),
    budget: TourOptimizerBudget = DEFAULT_BUDGET,
    probe: Probe | None = None,
) -> MoveOutcome:
    """Swap 2..m consecutive targets of the maximal vehicle for 1..m of another."""
    if cfg.structure is not Structure.VARIABLE:
        raise ValueError("variable-structure search needs a VARIABLE config")
    dist = inst.dist
    m = cfg.m
    recursive = cfg.variable_insertion is GroupInsertion.RECURSIVE
    i = sol.maximal_vehicle
    order_i = sol.tours[i].order
    dep_i, v_i = inst.depot(i), inst.speed(i)
    costs = sol.costs()
    movable = [j for j in range(inst.k) if j != i and _has_free_target(inst, sol.tours[j].order) >= 1]

    def insert(depot, order, group):
        if recursive:
            return _recursive_insert(dist, depot, order, group)
        c, p, r = _group_insert(dist, depot, order, group)
        return c, _splice(order, group, p, r)

    groups = []
    for size in range(2, m + 1):
        for win in _windows(inst, order_i, size):
            ratio = _removal_ratio(dist, dep_i, order_i, win)
            groups.append(((-ratio, size, win[0]), win))
    groups.sort(key=lambda g: g[0])

    for _, win in groups:
        group = [order_i[p] for p in win]
        best = None
        for j in movable:
            c, new_order = insert(inst.depot(j), sol.tours[j].order, group)
            c /= inst.speed(j)
            if best is None or c < best[0]:
                best = (c, j, new_order)
        if best is None:
            continue
        ins, j, oj = best
        dep_j, v_j = inst.depot(j), inst.speed(j)
        oi = _without(order_i, win)
        est_i = estimated_cost_after_remove(costs[i], _group_removal_delta(dist, dep_i, order_i, win) / v_i)
        est_j = estimated_cost_after_insert(costs[j], ins)
        if probe is not None:
            probe(i, list(oi), est_i)
            probe(j, list(oj), est_j)
        est_i += _two_opt(dist, dep_i, oi) / v_i
        est_j += _two_opt(dist, dep_j, oj) / v_j
        if probe is not None:
            probe(i, list(oi), est_i)
            probe(j, list(oj), est_j)

        blocked = frozenset(group)
        cands = []
        for size in range(1, m + 1):
            for w in _windows(inst, oj, size, blocked):
                h = [oj[q] for q in w]
                sav_h = _group_removal_delta(dist, dep_j, oj, w) / v_j
                c, new_oi = insert(dep_i, oi, h)
                ins_h = c / v_i
                if ins_h > 0:
                    ratio = sav_h / ins_h
                else:
                    ratio = math.inf if sav_h > 0 else 0.0
                cands.append(((-ratio, size, w), w, sav_h, ins_h, new_oi))
        cands.sort(key=lambda c: c[0])
        out = _try_return_groups(inst, sol, i, j, oi, oj, est_i, est_j, cands, cfg.n_candidates, budget, probe)
        if out is not None:
            return MoveOutcome(True, out)
    return MoveOutcome(False, sol)


def neighborhood_multiswap(
    sol: Solution,
    inst: Instance,
    cfg: MultiSwapConfig,
    budget: TourOptimizerBudget = DEFAULT_BUDGET,
    probe: Probe | None = None,
) -> MoveOutcome:
    if cfg.structure is Structure.FIXED:
        return neighborhood_multiswap_fixed(sol, inst, cfg, budget, probe)
    return neighborhood_multiswap_variable(sol, inst, cfg, budget, probe)

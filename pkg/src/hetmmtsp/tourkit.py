"""Single-vehicle tour construction and improvement.

Heuristic side: nearest-neighbour seeding, first-improvement 2-opt and
Or-opt run to local optimality.  Exact side: bitmask Held-Karp, used by
the oracle and tests.

The ``_two_opt`` / ``_or_opt`` workers operate on raw target lists and
return the length change in distance units so that callers can carry an
estimated tour cost through a move without recomputing it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, InvalidInputError
from .model import Instance, Tour, make_tour, route_length

HELD_KARP_CAP = 13
_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class TourOptimizerBudget:
    max_passes: int = 50
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_passes < 1:
            raise InvalidInputError("max_passes must be >= 1")


DEFAULT_BUDGET = TourOptimizerBudget()


def nn_construct(inst: Instance, vehicle: int, targets: Sequence[int]) -> list[int]:
    """Nearest-neighbour order from the vehicle's depot (ties: lower target id)."""
    dist = inst.dist
    remaining = sorted(set(targets))
    order: list[int] = []
    cur = inst.depot(vehicle)
    while remaining:
        row = dist[cur]
        best = min(remaining, key=lambda t: (row[t], t))
        remaining.remove(best)
        order.append(best)
        cur = best
    return order


def _two_opt(dist, depot: int, order: list[int]) -> float:
    """In-place first-improvement 2-opt to local optimality; returns length delta (<= 0)."""
    route = [depot] + order + [depot]
    size = len(route)
    delta = 0.0
    if size < 5:
        return 0.0
    for _ in range(_MAX_SWEEPS):
        improved = False
        for i in range(size - 3):
            a = route[i]
            b = route[i + 1]
            da = dist[a]
            for k in range(i + 2, size - 1):
                c = route[k]
                e = route[k + 1]
                new = da[c] + dist[b][e]
                old = da[b] + dist[c][e]
                if new < old:
                    route[i + 1:k + 1] = route[k:i:-1]
                    delta += new - old
                    b = route[i + 1]
                    improved = True
        if not improved:
            break
    order[:] = route[1:-1]
    return delta


def _or_opt(dist, depot: int, order: list[int], seg_lengths: Sequence[int] = (1, 2, 3)) -> float:
    """In-place Or-opt (segment relocation, both orientations); returns length delta (<= 0)."""
    delta = 0.0
    route = [depot] + order + [depot]
    for _ in range(_MAX_SWEEPS):
        moved = False
        size = len(route)
        for s in seg_lengths:
            i = 1
            while i + s <= size - 1:
                p, q = route[i - 1], route[i + s]
                s0, s1 = route[i], route[i + s - 1]
                removed = dist[p][s0] + dist[s1][q]
                best = None
                for x in range(size - 1):
                    if i - 1 <= x <= i + s - 1:
                        continue
                    u, w = route[x], route[x + 1]
                    base = dist[p][q] - dist[u][w]
                    fwd = base + dist[u][s0] + dist[s1][w]
                    if fwd < removed:
                        best = (x, False, fwd)
                        break
                    rev = base + dist[u][s1] + dist[s0][w]
                    if rev < removed:
                        best = (x, True, rev)
                        break
                if best is not None:
                    x, reverse, new = best
                    seg = route[i:i + s]
                    if reverse:
                        seg.reverse()
                    rest = route[:i] + route[i + s:]
                    at = x + 1 if x < i else x + 1 - s
                    route = rest[:at] + seg + rest[at:]
                    delta += new - removed
                    moved = True
                else:
                    i += 1
        if not moved:
            break
    order[:] = route[1:-1]
    return delta


def two_opt_pass(inst: Instance, vehicle: int, order: Sequence[int]) -> tuple[list[int], bool]:
    """2-opt a tour to local optimality.  Returns the new order and whether it changed."""
    new = list(order)
    delta = _two_opt(inst.dist, inst.depot(vehicle), new)
    return new, delta < 0


def or_opt_pass(
    inst: Instance, vehicle: int, order: Sequence[int], seg_lengths: Sequence[int] = (1, 2, 3)
) -> tuple[list[int], bool]:
    """Relocate segments of the given lengths until no relocation shortens the tour."""
    new = list(order)
    delta = _or_opt(inst.dist, inst.depot(vehicle), new, seg_lengths)
    return new, delta < 0


def optimize_order(dist, depot: int, order: list[int], budget: TourOptimizerBudget = DEFAULT_BUDGET) -> float:
    """Alternate 2-opt and Or-opt in place until neither improves; returns length delta."""
    start = time.perf_counter()
    total = 0.0
    for _ in range(budget.max_passes):
        d = _two_opt(dist, depot, order) + _or_opt(dist, depot, order)
        total += d
        if not d < 0:
            break
        if budget.time_limit is not None and time.perf_counter() - start > budget.time_limit:
            break
    return total


def optimize_tour(
    inst: Instance, vehicle: int, order: Sequence[int], budget: TourOptimizerBudget = DEFAULT_BUDGET
) -> Tour:
    """Stand-in for an external TSP improver: 2-opt + Or-opt to local optimality."""
    new = list(order)
    optimize_order(inst.dist, inst.depot(vehicle), new, budget)
    return make_tour(inst, vehicle, new)


def _held_karp_table(dist, depot: int, universe: Sequence[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Open-path DP: ``dp[mask, j]`` = shortest depot-start path over ``mask`` ending at ``j``."""
    m = len(universe)
    d0 = np.array([dist[depot][u] for u in universe], dtype=float)
    mat = np.array([[dist[a][b] for b in universe] for a in universe], dtype=float).reshape(m, m)
    full = 1 << m
    dp = np.full((full, m), np.inf)
    for j in range(m):
        dp[1 << j, j] = d0[j]
    masks = np.arange(full)
    popcount = np.zeros(full, dtype=np.int64)
    for j in range(m):
        popcount += (masks >> j) & 1
    for size in range(2, m + 1):
        layer = masks[popcount == size]
        for j in range(m):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            dp[sel, j] = (dp[prev] + mat[:, j]).min(axis=1)
    return dp, d0, mat


def subset_tour_lengths(inst: Instance, vehicle: int, universe: Sequence[int]) -> np.ndarray:
    """Optimal closed-tour length (distance units) for every subset of ``universe``.

    Entry ``mask`` covers the targets ``universe[b]`` for each set bit ``b``.
    """
    if len(universe) > HELD_KARP_CAP:
        raise CapacityError(f"Held-Karp is capped at {HELD_KARP_CAP} targets, got {len(universe)}")
    if not universe:
        return np.zeros(1)
    dp, d0, _ = _held_karp_table(inst.dist, inst.depot(vehicle), universe)
    out = (dp + d0[None, :]).min(axis=1)
    out[0] = 0.0
    return out


def exact_tsp_held_karp(inst: Instance, vehicle: int, targets: Sequence[int]) -> Tour:
    """Provably optimal tour over ``targets`` (at most 13)."""
    universe = sorted(set(targets))
    m = len(universe)
    if m > HELD_KARP_CAP:
        raise CapacityError(f"Held-Karp is capped at {HELD_KARP_CAP} targets, got {m}")
    if m == 0:
        return Tour(vehicle, [], 0.0)
    dp, d0, mat = _held_karp_table(inst.dist, inst.depot(vehicle), universe)
    mask = (1 << m) - 1
    last = int(np.argmin(dp[mask] + d0))
    path = [last]
    while mask != (1 << last):
        prev = mask ^ (1 << last)
        cand = dp[prev] + mat[:, last]
        nxt = int(np.argmin(cand))
        path.append(nxt)
        mask, last = prev, nxt
    order = [universe[j] for j in reversed(path)]
    return make_tour(inst, vehicle, order)


def tour_length(inst: Instance, vehicle: int, order: Sequence[int]) -> float:
    """Travel time of ``order`` using the cached distance matrix."""
    return route_length(inst.dist, inst.depot(vehicle), order) / inst.speed(vehicle)

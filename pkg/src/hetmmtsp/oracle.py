"""Exact min-max solutions for tiny instances.

Every assignment of free targets to vehicles is enumerated.  Per vehicle a
single Held-Karp table over (required + all free targets) yields the optimal
tour time of every subset, so each assignment is scored by table lookups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .model import Instance, Solution
from .tourkit import HELD_KARP_CAP, exact_tsp_held_karp, subset_tour_lengths


@dataclass(frozen=True)
class OracleLimit:
    max_free_targets: int = 10
    max_per_vehicle: int = 13

    def __post_init__(self):
        if self.max_free_targets < 0 or self.max_per_vehicle < 0:
            raise ValueError("oracle limits must be non-negative")


@dataclass
class OracleResult:
    solution: Solution
    objective: float
    assignments: int


def brute_force_minmax(inst: Instance, limit: OracleLimit = OracleLimit()) -> OracleResult:
    """Certified optimal solution by exhaustive assignment enumeration."""
    free = inst.free_targets()
    nf = len(free)
    if nf > limit.max_free_targets:
        raise CapacityError(f"{nf} free targets exceed the oracle limit of {limit.max_free_targets}")
    cap = min(limit.max_per_vehicle, HELD_KARP_CAP)
    tables = []
    bases = []
    for j, veh in enumerate(inst.vehicles):
        req = sorted(veh.required)
        if len(req) + nf > cap:
            raise CapacityError(
                f"vehicle {j} could be asked to visit {len(req) + nf} targets; limit is {cap}"
            )
        tables.append(subset_tour_lengths(inst, j, req + free) / veh.speed)
        bases.append(len(req))

    count = inst.k ** nf
    idx = np.arange(count, dtype=np.int64)
    masks = [np.full(count, (1 << b) - 1, dtype=np.int64) for b in bases]
    radix = 1
    for f in range(nf):
        digit = (idx // radix) % inst.k
        radix *= inst.k
        for j in range(inst.k):
            masks[j] |= (digit == j).astype(np.int64) << (bases[j] + f)
    worst = np.zeros(count)
    for j in range(inst.k):
        np.maximum(worst, tables[j][masks[j]], out=worst)
    best = int(np.argmin(worst))

    tours = []
    for j, veh in enumerate(inst.vehicles):
        mine = list(veh.required)
        m = int(masks[j][best]) >> bases[j]
        mine += [free[f] for f in range(nf) if m >> f & 1]
        tours.append(exact_tsp_held_karp(inst, j, mine))
    sol = Solution(tours)
    return OracleResult(sol, sol.objective, count)

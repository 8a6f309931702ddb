"""Stage orchestration: construction, local search, depot perturbation, multi-run bookkeeping."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .construct import ConstructionMethod, construct
from .model import Instance, Point, Solution, Tour, make_tour
from .neighborhoods import (
    MoveOutcome,
    MultiSwapConfig,
    SwitchSwapConfig,
    neighborhood_multiswap,
    neighborhood_swap,
    neighborhood_switch,
)
from .tourkit import DEFAULT_BUDGET, TourOptimizerBudget, optimize_order

log = logging.getLogger(__name__)

PERTURB_STEP = math.radians(144.0)

#: observer(stage tag, incumbent) is called after every stage transition
Observer = Callable[[str, Solution], None]


@dataclass(frozen=True)
class SolverConfig:
    construction: ConstructionMethod = ConstructionMethod.RECURSIVE_INSERTION
    switch_swap: SwitchSwapConfig = SwitchSwapConfig()
    multiswap: MultiSwapConfig | tuple[MultiSwapConfig, ...] | None = MultiSwapConfig()
    perturb_attempts: int = 5
    runs: int = 3
    rng_seed: int = 0
    time_limit: float = 3600.0
    tour_budget: TourOptimizerBudget = DEFAULT_BUDGET

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.perturb_attempts < 1:
            raise ValueError("perturb_attempts must be >= 1")
        ms = self.multiswap
        if ms is None:
            ms = ()
        elif isinstance(ms, MultiSwapConfig):
            ms = (ms,)
        object.__setattr__(self, "multiswap", tuple(ms))


@dataclass
class RunRecord:
    instance: str
    objective: float
    wall: float
    seed: int
    run: int = 0
    truncated: bool = False
    trace: list[tuple[str, float, float]] = field(default_factory=list)


@dataclass
class PerturbationOutcome(MoveOutcome):
    #: per attempt, the depot angles (radians) used for every vehicle
    angles: list[np.ndarray] = field(default_factory=list)


@dataclass
class SolveResult:
    solution: Solution
    records: list[RunRecord]

    @property
    def objective(self) -> float:
        return self.solution.objective

    @property
    def truncated(self) -> bool:
        return all(r.truncated for r in self.records)


def local_search(
    sol: Solution,
    inst: Instance,
    cfg: SolverConfig = SolverConfig(),
    deadline: float | None = None,
) -> Solution:
    """Switch to exhaustion, then swap, then the multi-target swaps; restart on any success."""
    budget = cfg.tour_budget
    while True:
        if deadline is not None and time.perf_counter() > deadline:
            return sol
        out = neighborhood_switch(sol, inst, cfg.switch_swap, budget)
        if out.improved:
            sol = out.solution
            continue
        out = neighborhood_swap(sol, inst, cfg.switch_swap, budget)
        if out.improved:
            sol = out.solution
            continue
        for ms in cfg.multiswap:
            out = neighborhood_multiswap(sol, inst, ms, budget)
            if out.improved:
                sol = out.solution
                break
        else:
            return sol


def perturbation_radius(inst: Instance, vehicle: int, order: Sequence[int]) -> float:
    """Half the summed travel time of the two depot edges of the tour (0 for an empty tour)."""
    if not order:
        return 0.0
    dist = inst.dist
    dep = inst.depot(vehicle)
    return 0.5 * (dist[order[-1]][dep] + dist[dep][order[0]]) / inst.speed(vehicle)


def perturb_depot(inst: Instance, vehicle: int, tour: Tour | Sequence[int], angle: float) -> Point:
    """Depot displaced by the perturbation radius along ``angle``."""
    order = tour.order if isinstance(tour, Tour) else tour
    r = perturbation_radius(inst, vehicle, order)
    d = inst.vehicles[vehicle].depot
    return Point(d.x + r * math.cos(angle), d.y + r * math.sin(angle))


def attempt_angles(thetas: np.ndarray, attempt: int) -> np.ndarray:
    return np.mod(thetas + attempt * PERTURB_STEP, 2 * math.pi)


def _retour(inst: Instance, orders: Sequence[Sequence[int]], budget: TourOptimizerBudget) -> Solution:
    tours = []
    for j, order in enumerate(orders):
        order = list(order)
        optimize_order(inst.dist, inst.depot(j), order, budget)
        tours.append(make_tour(inst, j, order))
    return Solution(tours)


def perturbation_round(
    sol: Solution,
    inst: Instance,
    cfg: SolverConfig,
    rng: np.random.Generator,
    deadline: float | None = None,
) -> PerturbationOutcome:
    """Displace depots, re-search on the displaced graph, map the allocation back.

    Attempt ``a`` rotates every vehicle's random angle by ``a * 144`` degrees.
    Stops at the first attempt whose allocation beats ``sol`` on the true graph.
    """
    budget = cfg.tour_budget
    thetas = rng.uniform(0.0, 2 * math.pi, size=inst.k)
    angles: list[np.ndarray] = []
    obj = sol.objective
    for a in range(cfg.perturb_attempts):
        if deadline is not None and time.perf_counter() > deadline:
            break
        ang = attempt_angles(thetas, a)
        angles.append(ang)
        depots = [perturb_depot(inst, j, sol.tours[j], ang[j]) for j in range(inst.k)]
        shaken = inst.with_depots(depots)
        start = _retour(shaken, sol.orders(), budget)
        found = local_search(start, shaken, cfg, deadline)
        back = _retour(inst, found.orders(), budget)
        if back.objective < obj:
            return PerturbationOutcome(True, back, angles)
    return PerturbationOutcome(False, sol, angles)


def run_seed(rng_seed: int, run: int) -> int:
    """Seed of one run, derived from the configured seed."""
    return int(np.random.SeedSequence([rng_seed, run]).generate_state(1)[0])


def solve(inst: Instance, cfg: SolverConfig = SolverConfig(), observer: Observer | None = None) -> SolveResult:
    """Best of ``cfg.runs`` independent runs of construct -> local search -> perturb loop.

    Construction and the first local search are deterministic, so they are
    computed once and shared by all runs; their time is charged to every run.
    ``time_limit`` applies to each run separately.
    """
    t0 = time.perf_counter()
    deadline0 = t0 + cfg.time_limit
    sol = construct(inst, cfg.construction, cfg.tour_budget)
    t_construct = time.perf_counter() - t0
    prefix = [("construct", sol.objective, t_construct)]
    if observer is not None:
        observer("construct", sol)
    sol = local_search(sol, inst, cfg, deadline0)
    t_prefix = time.perf_counter() - t0
    prefix.append(("local_search", sol.objective, t_prefix))
    if observer is not None:
        observer("local_search", sol)
    shared = sol

    records = []
    best: Solution | None = None
    for run in range(cfg.runs):
        seed = run_seed(cfg.rng_seed, run)
        rng = np.random.default_rng(seed)
        rec = RunRecord(inst.name, shared.objective, 0.0, seed, run, trace=list(prefix))
        start = time.perf_counter() - t_prefix
        deadline = start + cfg.time_limit
        sol = shared
        if time.perf_counter() > deadline:
            rec.truncated = True
        while not rec.truncated:
            out = perturbation_round(sol, inst, cfg, rng, deadline)
            if time.perf_counter() > deadline and not out.improved:
                rec.truncated = True
                break
            if not out.improved:
                break
            sol = out.solution
            rec.trace.append(("perturb", sol.objective, time.perf_counter() - start))
            if observer is not None:
                observer("perturb", sol)
            sol = local_search(sol, inst, cfg, deadline)
            rec.trace.append(("local_search", sol.objective, time.perf_counter() - start))
            if observer is not None:
                observer("local_search", sol)
            if time.perf_counter() > deadline:
                rec.truncated = True
        rec.objective = sol.objective
        rec.wall = time.perf_counter() - start
        records.append(rec)
        log.debug("%s run %d: %.6f in %.2fs", inst.name, run, rec.objective, rec.wall)
        if best is None or sol.objective < best.objective:
            best = sol
    return SolveResult(best, records)

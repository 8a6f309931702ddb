"""Experiment matrices, reference comparisons and summary statistics."""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from importlib import resources
from operator import attrgetter
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ..construct import ConstructionMethod
from ..errors import InvalidInputError
from ..model import Instance
from ..neighborhoods import (
    FixedSort,
    GroupInsertion,
    MultiSwapConfig,
    Structure,
    SwitchSwapConfig,
    VehicleSortMetric,
)
from ..solver import SolverConfig, solve
from .formats import ResultRow, append_result

log = logging.getLogger(__name__)

BASELINES = ("modified_md", "best_switch_swap", "best_multiswap")
EQUAL_RTOL = 1e-6


# ---------------------------------------------------------------- configs

def config_from_options(opts: Mapping) -> SolverConfig:
    """Build a solver config from CLI-style options; missing keys take the defaults.

    Keys: construction, metric, top_vehicles, multiswap (off/fixed/variable),
    group_size (int or list), candidates, fixed_sort, variable_insertion,
    perturb_attempts, runs, seed, time_limit.
    """
    ss = SwitchSwapConfig(
        VehicleSortMetric(opts.get("metric", "insertion")), int(opts.get("top_vehicles", 2))
    )
    mode = opts.get("multiswap", "fixed")
    sizes = opts.get("group_size", 2)
    sizes = [sizes] if isinstance(sizes, int) else list(sizes)
    if mode == "off":
        ms: tuple[MultiSwapConfig, ...] = ()
    else:
        ms = tuple(
            MultiSwapConfig(
                Structure(mode),
                int(m),
                int(opts.get("candidates", 20)),
                FixedSort(opts.get("fixed_sort", "insertion")),
                GroupInsertion(opts.get("variable_insertion", "group")),
            )
            for m in sizes
        )
    return SolverConfig(
        construction=ConstructionMethod(opts.get("construction", "recursive")),
        switch_swap=ss,
        multiswap=ms,
        perturb_attempts=int(opts.get("perturb_attempts", 5)),
        runs=int(opts.get("runs", 3)),
        rng_seed=int(opts.get("seed", 0)),
        time_limit=float(opts.get("time_limit", 3600.0)),
    )


def cell_seed(base_seed: int, instance: str, config: str) -> int:
    """Seed of one matrix cell, stable across processes and orderings."""
    h = hashlib.sha256(f"{base_seed}\x00{instance}\x00{config}".encode()).digest()
    return int.from_bytes(h[:4], "little")


# ---------------------------------------------------------------- statistics

@dataclass(frozen=True)
class Stats:
    min: float
    max: float
    mean: float
    median: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Stats":
        a = np.asarray(values, dtype=float)
        if a.size == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan)
        return cls(float(a.min()), float(a.max()), float(a.mean()), float(np.median(a)))


def deviation(objective: float, baseline: float) -> float:
    """Percentage deviation of ``objective`` from ``baseline``."""
    return 100.0 * (objective - baseline) / baseline


# ---------------------------------------------------------------- references

@dataclass
class ReferenceTable:
    baseline: str
    objective: dict[str, float]
    time: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, val in list(self.objective.items()) + list(self.time.items()):
            if not val > 0:
                raise InvalidInputError(f"reference value for {name} must be positive, got {val}")

    def __contains__(self, name: str) -> bool:
        return name in self.objective

    def __len__(self) -> int:
        return len(self.objective)


def load_reference(baseline: str = "modified_md", path: str | os.PathLike | None = None) -> ReferenceTable:
    """Load one baseline column from a reference CSV (the bundled tables by default).

    A custom file needs an ``instance`` column plus either ``<baseline>`` and
    ``<baseline>_time_s`` columns or plain ``objective`` and ``time_s`` columns.
    """
    if path is None:
        text = resources.files("hetmmtsp.data").joinpath("reference_tables.csv").read_text()
    else:
        text = Path(path).read_text()
    reader = csv.DictReader(text.splitlines())
    cols = reader.fieldnames or []
    if baseline in cols:
        obj_col, time_col = baseline, f"{baseline}_time_s"
    elif "objective" in cols:
        obj_col, time_col = "objective", "time_s"
    else:
        raise InvalidInputError(f"reference file has no column {baseline!r}; columns are {cols}")
    objective, times = {}, {}
    for rec in reader:
        objective[rec["instance"]] = float(rec[obj_col])
        if rec.get(time_col):
            times[rec["instance"]] = float(rec[time_col])
    return ReferenceTable(baseline, objective, times)


@dataclass(frozen=True)
class ComparisonEntry:
    instance: str
    config: str
    objective: float
    reference: float
    deviation: float
    verdict: str


@dataclass
class ComparisonReport:
    entries: list[ComparisonEntry]

    def count(self, verdict: str) -> int:
        return sum(e.verdict == verdict for e in self.entries)

    @property
    def better(self) -> int:
        return self.count("better")

    @property
    def equal(self) -> int:
        return self.count("equal")

    @property
    def worse(self) -> int:
        return self.count("worse")

    def by_config(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for e in self.entries:
            out.setdefault(e.config, {"better": 0, "equal": 0, "worse": 0})[e.verdict] += 1
        return out

    def write_csv(self, path: str | os.PathLike) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instance", "config", "objective", "reference", "deviation_pct", "verdict"])
            for e in self.entries:
                w.writerow([e.instance, e.config, repr(e.objective), repr(e.reference), f"{e.deviation:.6f}", e.verdict])


def classify(objective: float, reference: float, rtol: float = EQUAL_RTOL) -> str:
    if math.isclose(objective, reference, rel_tol=rtol, abs_tol=0.0):
        return "equal"
    return "better" if objective < reference else "worse"


def compare_to_reference(rows: Iterable[ResultRow], ref: ReferenceTable) -> ComparisonReport:
    """Classify every successful row against the reference objective of its instance."""
    entries = []
    for row in rows:
        if not row.ok:
            continue
        if row.instance not in ref:
            raise InvalidInputError(f"instance {row.instance!r} is missing from reference {ref.baseline!r}")
        base = ref.objective[row.instance]
        entries.append(
            ComparisonEntry(
                row.instance, row.config, row.objective, base,
                deviation(row.objective, base), classify(row.objective, base),
            )
        )
    return ComparisonReport(entries)


# ---------------------------------------------------------------- plot data

PLOT_FIELDS = ("group", "count", "min", "q1", "median", "q3", "max", "mean")


@dataclass(frozen=True)
class PlotRecord:
    group: str
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float


def emit_plot_data(
    rows: Iterable,
    grouping: str | Callable = "config",
    value: str | Callable = "objective",
) -> list[PlotRecord]:
    """Box-plot statistics per group.

    ``grouping`` and ``value`` are attribute names or callables applied to
    each row.  Quartiles interpolate linearly between the closest ranks
    (positions ``p * (n - 1)`` of the sorted values).  Groups keep first-seen
    order.
    """
    key = attrgetter(grouping) if isinstance(grouping, str) else grouping
    val = attrgetter(value) if isinstance(value, str) else value
    groups: dict[str, list[float]] = {}
    for row in rows:
        groups.setdefault(str(key(row)), []).append(float(val(row)))
    out = []
    for g, vals in groups.items():
        a = np.asarray(vals)
        q = np.percentile(a, [0, 25, 50, 75, 100], method="linear")
        out.append(PlotRecord(g, a.size, *map(float, q[:4]), float(q[4]), float(a.mean())))
    return out


def write_plot_data(records: Iterable[PlotRecord], path: str | os.PathLike) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PLOT_FIELDS)
        for r in records:
            w.writerow([r.group, r.count, *(repr(getattr(r, f)) for f in PLOT_FIELDS[2:])])


# ---------------------------------------------------------------- matrix

@dataclass
class ConfigSummary:
    config: str
    cells: int
    errors: int
    deviation: Stats | None
    wall: Stats


@dataclass
class MatrixResult:
    rows: list[ResultRow]
    summary: dict[str, ConfigSummary]

    def write_summary(self, path: str | os.PathLike) -> None:
        """One line per config: min/max/mean/median of deviation% and wall time."""
        stats = ("min", "max", "mean", "median")
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "cells", "errors"]
                       + [f"deviation_{s}" for s in stats] + [f"wall_{s}" for s in stats])
            for s in self.summary.values():
                dev = [getattr(s.deviation, k) if s.deviation else "" for k in stats]
                w.writerow([s.config, s.cells, s.errors, *dev, *(getattr(s.wall, k) for k in stats)])


def _run_cell(inst: Instance, label: str, cfg: SolverConfig, seed: int) -> ResultRow:
    t0 = time.perf_counter()
    try:
        res = solve(inst, replace(cfg, rng_seed=seed))
    except Exception as exc:  # recorded as an error row, the matrix goes on
        log.warning("cell %s/%s failed: %s", inst.name, label, exc)
        status = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
        return ResultRow(inst.name, label, float("nan"), time.perf_counter() - t0, seed, cfg.runs, status)
    # truncated cells still carry a feasible objective
    status = "truncated" if res.truncated else "ok"
    return ResultRow(inst.name, label, res.objective, time.perf_counter() - t0, seed, cfg.runs, status)


def run_matrix(
    instances: Sequence[Instance],
    configs: Mapping[str, SolverConfig],
    sink: str | os.PathLike | None = None,
    base_seed: int = 0,
    workers: int = 1,
    baseline: ReferenceTable | str | None = None,
) -> MatrixResult:
    """Solve every (instance, config) cell and summarize per config.

    Rows are appended to ``sink`` as cells finish.  ``baseline`` is either a
    reference table or the label of one of ``configs``; deviation statistics
    are skipped when it is ``None``.
    """
    cells = [(inst, label, cfg, cell_seed(base_seed, inst.name, label))
             for inst in instances for label, cfg in configs.items()]
    rows: list[ResultRow] = []

    def emit(row: ResultRow) -> None:
        rows.append(row)
        if sink is not None:
            append_result(sink, row)

    if workers <= 1:
        for cell in cells:
            emit(_run_cell(*cell))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, *cell) for cell in cells]
            for fut in as_completed(futures):
                emit(fut.result())
        # canonical order for callers; the sink keeps completion order
        position = {(c[0].name, c[1]): i for i, c in enumerate(cells)}
        rows.sort(key=lambda r: position[(r.instance, r.config)])
    return MatrixResult(rows, summarize(rows, configs.keys(), baseline))


def summarize(
    rows: Sequence[ResultRow], labels: Iterable[str], baseline: ReferenceTable | str | None = None
) -> dict[str, ConfigSummary]:
    if isinstance(baseline, str):
        base = {r.instance: r.objective for r in rows if r.config == baseline and r.ok}
    elif isinstance(baseline, ReferenceTable):
        base = baseline.objective
    else:
        base = None
    out = {}
    for label in labels:
        mine = [r for r in rows if r.config == label]
        good = [r for r in mine if r.ok]
        dev = None
        if base is not None:
            dev = Stats.of([deviation(r.objective, base[r.instance]) for r in good if r.instance in base])
        out[label] = ConfigSummary(label, len(mine), len(mine) - len(good), dev,
                                   Stats.of([r.wall_s for r in mine]))
    return out

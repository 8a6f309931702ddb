"""Heterogeneous benchmark generation from homogeneous base instances."""

from __future__ import annotations

import enum
import hashlib
import logging
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import GenerationError, HetMMError
from .model import Instance, VehicleSpec

log = logging.getLogger(__name__)

SPEED_SET = (1.0, 1.25, 1.5, 1.75, 2.0)


class HeterogeneityMode(enum.Enum):
    ZERO_TARGETS = 0
    THREE_TARGETS = 3
    FIVE_TARGETS = 5


def assign_speeds(k: int, rng: np.random.Generator) -> list[float]:
    """``k`` independent uniform draws from the speed set."""
    if k <= 0:
        return []
    return [SPEED_SET[i] for i in rng.integers(0, len(SPEED_SET), size=k)]


def _pick_indices(size: int, mode: HeterogeneityMode) -> list[int]:
    """Indices into a distance-sorted pool of ``size`` targets picked under ``mode``."""
    median = (size - 1) // 2
    if mode is HeterogeneityMode.THREE_TARGETS:
        extremes = [0, size - 1]
    else:
        extremes = [0, 1, size - 2, size - 1]
    taken = set(extremes)
    # step the median toward the centre of the pool until it is free
    centre = (size - 1) / 2
    step = 0
    while median in taken:
        step += 1
        lo, hi = median - step, median + step
        for cand in sorted((lo, hi), key=lambda c: (abs(c - centre), c)):
            if 0 <= cand < size and cand not in taken:
                median = cand
                break
        if step > size:
            raise GenerationError("pool too small for the assignment rule")
    return sorted(taken | {median})


def assign_required_targets(inst: Instance, mode: HeterogeneityMode, name: str | None = None) -> Instance:
    """Give each vehicle, in index order, its closest / median / farthest remaining targets."""
    per = mode.value
    if per and inst.n < per * inst.k:
        raise GenerationError(
            f"instance {inst.name!r}: {inst.n} targets cannot give {per} to each of {inst.k} vehicles"
        )
    pool = list(range(inst.n))
    required: list[frozenset[int]] = []
    for j in range(inst.k):
        if not per:
            required.append(frozenset())
            continue
        row = inst.dist[inst.depot(j)]
        pool.sort(key=lambda t: (row[t], t))
        picks = [pool[i] for i in _pick_indices(len(pool), mode)]
        required.append(frozenset(picks))
        drop = set(picks)
        pool = [t for t in pool if t not in drop]
    vehicles = [VehicleSpec(v.depot, v.speed, r) for v, r in zip(inst.vehicles, required)]
    return inst.with_vehicles(vehicles, name=name)


def instance_rng(seed: int, name: str) -> np.random.Generator:
    """Generator keyed on (seed, instance name), stable across processes."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return np.random.default_rng([int(seed), int.from_bytes(digest[:8], "little")])


def generate_suite(
    bases: Iterable[Instance | str | Path],
    seed: int = 0,
    errors: list[tuple[str, str]] | None = None,
) -> list[Instance]:
    """Speed-randomized 0/3/5-required-target variants of every base instance.

    Variants are named ``<base>_0``, ``<base>_3``, ``<base>_5``; the five-target
    variant is skipped when the base has fewer than five targets per vehicle.
    Bases that cannot be read are reported in ``errors`` and skipped.
    """
    from .harness.formats import read_instance

    out: list[Instance] = []
    for base in bases:
        label = str(base)
        try:
            if not isinstance(base, Instance):
                base = read_instance(base)
            label = base.name
            speeds = assign_speeds(base.k, instance_rng(seed, base.name))
            vehicles = [VehicleSpec(v.depot, s) for v, s in zip(base.vehicles, speeds)]
            hetero = base.with_vehicles(vehicles)
        except (HetMMError, OSError) as exc:
            log.warning("skipping base %s: %s", label, exc)
            if errors is not None:
                errors.append((label, str(exc)))
            continue
        for mode in HeterogeneityMode:
            variant = f"{base.name}_{mode.value}"
            try:
                out.append(assign_required_targets(hetero, mode, name=variant))
            except GenerationError as exc:
                log.info("no %s: %s", variant, exc)
    return out


def random_base(
    name: str, n_targets: int, n_vehicles: int, rng: np.random.Generator, extent: float = 100.0
) -> Instance:
    """Uniformly scattered targets and depots, unit speeds, no required targets."""
    pts = rng.uniform(0.0, extent, size=(n_targets, 2))
    deps = rng.uniform(0.0, extent, size=(n_vehicles, 2))
    return Instance(name, pts.tolist(), [VehicleSpec(tuple(d)) for d in deps])


"""Problem data model for the heterogeneous min-max multi-depot TSP.

Vertex numbering used throughout the package: targets are ``0..n-1`` and
the depot of vehicle ``j`` is vertex ``n + j``.  A tour is stored as the
list of target ids it visits; the depot is implicit at both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError

#: instances up to this many vertices get a dense precomputed distance matrix
DENSE_MATRIX_LIMIT = 2000


class Point(NamedTuple):
    x: float
    y: float


def _check_point(p: Point, what: str) -> Point:
    p = Point(float(p[0]), float(p[1]))
    if not (math.isfinite(p.x) and math.isfinite(p.y)):
        raise InvalidInputError(f"{what} has non-finite coordinates {tuple(p)}")
    return p


@dataclass(frozen=True)
class VehicleSpec:
    depot: Point
    speed: float = 1.0
    required: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "depot", _check_point(self.depot, "depot"))
        object.__setattr__(self, "required", frozenset(int(t) for t in self.required))
        speed = float(self.speed)
        if not (math.isfinite(speed) and speed > 0):
            raise InvalidInputError(f"vehicle speed must be positive and finite, got {self.speed!r}")
        object.__setattr__(self, "speed", speed)


class _LazyDistances:
    """Row-on-demand Euclidean distances for instances too large for a dense matrix."""

    def __init__(self, coords: np.ndarray):
        self._coords = coords
        self._rows: dict[int, list[float]] = {}

    def __getitem__(self, i: int) -> list[float]:
        row = self._rows.get(i)
        if row is None:
            diff = self._coords - self._coords[i]
            row = np.hypot(diff[:, 0], diff[:, 1]).tolist()
            self._rows[i] = row
        return row

    def __len__(self):
        return len(self._coords)


class Instance:
    """Targets plus a fleet of vehicles with depots, speeds and required-target sets.

    Immutable after construction.  ``dist[a][b]`` is the Euclidean distance
    between vertices ``a`` and ``b`` (speed not applied).
    """

    __slots__ = ("name", "targets", "vehicles", "n", "k", "owner", "coords", "dist")

    def __init__(self, name: str, targets: Iterable[Sequence[float]], vehicles: Iterable[VehicleSpec]):
        self.name = str(name)
        self.targets: tuple[Point, ...] = tuple(
            _check_point(Point(*t), f"target {i}") for i, t in enumerate(targets)
        )
        self.vehicles: tuple[VehicleSpec, ...] = tuple(vehicles)
        self.n = len(self.targets)
        self.k = len(self.vehicles)
        if self.k < 1:
            raise InvalidInputError(f"instance {self.name!r} needs at least one vehicle")

        owner = [-1] * self.n
        for j, veh in enumerate(self.vehicles):
            for t in veh.required:
                if not 0 <= t < self.n:
                    raise InvalidInputError(f"vehicle {j} requires unknown target {t}")
                if owner[t] != -1:
                    raise InvalidInputError(
                        f"target {t} is required by both vehicle {owner[t]} and vehicle {j}"
                    )
                owner[t] = j
        self.owner: tuple[int, ...] = tuple(owner)

        pts = list(self.targets) + [v.depot for v in self.vehicles]
        self.coords = np.array(pts, dtype=float).reshape(-1, 2)
        self.coords.setflags(write=False)
        if len(pts) <= DENSE_MATRIX_LIMIT:
            diff = self.coords[:, None, :] - self.coords[None, :, :]
            self.dist = np.hypot(diff[..., 0], diff[..., 1]).tolist()
        else:
            self.dist = _LazyDistances(self.coords)

    def __repr__(self):
        return f"Instance({self.name!r}, n={self.n}, k={self.k})"

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name, self.targets, self.vehicles) == (other.name, other.targets, other.vehicles)

    def __hash__(self):
        return hash((self.name, self.targets, self.vehicles))

    def depot(self, j: int) -> int:
        """Vertex id of vehicle ``j``'s depot."""
        return self.n + j

    def speed(self, j: int) -> float:
        return self.vehicles[j].speed

    def required(self, j: int) -> frozenset[int]:
        return self.vehicles[j].required

    def free_targets(self) -> list[int]:
        return [t for t in range(self.n) if self.owner[t] == -1]

    def with_depots(self, depots: Sequence[Sequence[float]], name: str | None = None) -> "Instance":
        """Copy of the instance with every depot moved; speeds and required sets kept."""
        if len(depots) != self.k:
            raise InvalidInputError("need one depot per vehicle")
        vehicles = [
            VehicleSpec(Point(*d), v.speed, v.required) for d, v in zip(depots, self.vehicles)
        ]
        return Instance(self.name if name is None else name, self.targets, vehicles)

    def with_vehicles(self, vehicles: Iterable[VehicleSpec], name: str | None = None) -> "Instance":
        return Instance(self.name if name is None else name, self.targets, vehicles)


@dataclass
class Tour:
    vehicle: int
    order: list[int]
    cost: float

    def copy(self) -> "Tour":
        return Tour(self.vehicle, list(self.order), self.cost)


@dataclass
class Solution:
    tours: list[Tour]

    @property
    def objective(self) -> float:
        return max(t.cost for t in self.tours)

    @property
    def maximal_vehicle(self) -> int:
        """Vehicle attaining the objective (lowest id on ties)."""
        best = 0
        for j, t in enumerate(self.tours):
            if t.cost > self.tours[best].cost:
                best = j
        return best

    def costs(self) -> list[float]:
        return [t.cost for t in self.tours]

    def orders(self) -> list[list[int]]:
        return [list(t.order) for t in self.tours]

    def copy(self) -> "Solution":
        return Solution([t.copy() for t in self.tours])


def edge_cost(a: Sequence[float], b: Sequence[float], v: float) -> float:
    """Travel time between two points at speed ``v``."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if not all(math.isfinite(c) for c in (ax, ay, bx, by)):
        raise InvalidInputError("edge_cost: non-finite coordinate")
    if not v > 0:
        raise InvalidInputError(f"edge_cost: speed must be positive, got {v!r}")
    return math.hypot(ax - bx, ay - by) / v


def tour_cost(inst: Instance, vehicle: int, order: Sequence[int]) -> float:
    """Tour time computed from coordinates, independent of the cached distance matrix."""
    veh = inst.vehicles[vehicle]
    if not order:
        return 0.0
    prev = veh.depot
    total = 0.0
    for t in order:
        if not 0 <= t < inst.n:
            raise InvalidInputError(f"unknown target id {t}")
        p = inst.targets[t]
        total += math.hypot(p.x - prev.x, p.y - prev.y)
        prev = p
    total += math.hypot(veh.depot.x - prev.x, veh.depot.y - prev.y)
    return total / veh.speed


def route_length(dist, depot: int, order: Sequence[int]) -> float:
    """Length (distance units) of the closed route depot -> order -> depot."""
    if not order:
        return 0.0
    total = dist[depot][order[0]] + dist[order[-1]][depot]
    for a, b in zip(order, order[1:]):
        total += dist[a][b]
    return total


def make_tour(inst: Instance, vehicle: int, order: Sequence[int]) -> Tour:
    order = list(order)
    return Tour(vehicle, order, route_length(inst.dist, inst.depot(vehicle), order) / inst.speed(vehicle))


def make_solution(inst: Instance, orders: Sequence[Sequence[int]]) -> Solution:
    if len(orders) != inst.k:
        raise InvalidInputError(f"expected {inst.k} tours, got {len(orders)}")
    return Solution([make_tour(inst, j, o) for j, o in enumerate(orders)])


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_solution(inst: Instance, sol: Solution) -> ValidationReport:
    """Check partition, required assignments and cached costs; never raises."""
    report = ValidationReport()
    bad = report.violations
    if len(sol.tours) != inst.k:
        bad.append(f"expected {inst.k} tours, found {len(sol.tours)}")
    seen: dict[int, int] = {}
    for j, tour in enumerate(sol.tours):
        if tour.vehicle != j:
            bad.append(f"tour {j} is labelled vehicle {tour.vehicle}")
        for t in tour.order:
            if not (isinstance(t, (int, np.integer)) and 0 <= t < inst.n):
                bad.append(f"unknown target {t!r} in tour {j}")
                continue
            if t in seen:
                bad.append(f"duplicate target {t} (vehicles {seen[t]} and {j})")
                continue
            seen[t] = j
            if inst.owner[t] != -1 and inst.owner[t] != j:
                bad.append(
                    f"required-assignment breach: target {t} belongs to vehicle {inst.owner[t]}, "
                    f"found in vehicle {j}"
                )
        if j < inst.k:
            try:
                true_cost = tour_cost(inst, j, [t for t in tour.order if 0 <= t < inst.n])
            except InvalidInputError:
                continue
            if not math.isclose(tour.cost, true_cost, rel_tol=1e-9, abs_tol=1e-12):
                bad.append(f"cost-cache drift on vehicle {j}: cached {tour.cost!r}, actual {true_cost!r}")
    for t in range(inst.n):
        if t not in seen:
            bad.append(f"missed target {t}")
    return report

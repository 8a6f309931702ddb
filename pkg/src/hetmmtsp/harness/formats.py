"""Instance documents, result rows and solution dumps.

Instance document layout::

    NAME: MM1_3
    VEHICLES: 2
    TARGETS: 4
    VEHICLE_SECTION
    # id depot_x depot_y speed [required target ids...]
    0 0.0 0.0 1.25 3
    1 10.0 0.0 1.0
    TARGET_SECTION
    # id x y
    0 1.0 2.0
    ...
    EOF

Lines starting with ``#`` and blank lines are ignored.  Coordinates are
written with ``repr`` so a write/parse round trip is exact.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import InvalidInputError, ParseError
from ..model import Instance, Point, Solution, VehicleSpec

RESULT_FIELDS = ("instance", "config", "objective", "wall_s", "seed", "runs", "status")


def _number(tok: str, line: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number for {what}, got {tok!r}", line) from None


def _integer(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer for {what}, got {tok!r}", line) from None


def parse_instance(document: str) -> Instance:
    header: dict[str, str] = {}
    vehicles: dict[int, tuple[int, list[str]]] = {}
    targets: dict[int, tuple[int, list[str]]] = {}
    section = None
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "EOF":
            break
        if line in ("VEHICLE_SECTION", "TARGET_SECTION"):
            section = line
            continue
        if section is None:
            if ":" not in line:
                raise ParseError(f"expected 'KEY: value' header, got {line!r}", lineno)
            key, value = (s.strip() for s in line.split(":", 1))
            header[key.upper()] = value
            continue
        toks = line.split()
        ident = _integer(toks[0], lineno, "id")
        table = vehicles if section == "VEHICLE_SECTION" else targets
        if ident in table:
            raise ParseError(f"duplicate {section.split('_')[0].lower()} id {ident}", lineno)
        table[ident] = (lineno, toks[1:])

    for key in ("NAME", "VEHICLES", "TARGETS"):
        if key not in header:
            raise ParseError(f"missing {key} header")
    k = _integer(header["VEHICLES"], None, "VEHICLES")
    n = _integer(header["TARGETS"], None, "TARGETS")
    if sorted(vehicles) != list(range(k)):
        raise ParseError(f"vehicle ids must be 0..{k - 1}, found {sorted(vehicles)}")
    if sorted(targets) != list(range(n)):
        raise ParseError(f"target ids must be 0..{n - 1}, found {sorted(targets)}")

    pts = []
    for t in range(n):
        lineno, toks = targets[t]
        if len(toks) != 2:
            raise ParseError("target line needs: id x y", lineno)
        pts.append(Point(_number(toks[0], lineno, "x"), _number(toks[1], lineno, "y")))

    specs = []
    claimed: dict[int, int] = {}
    for j in range(k):
        lineno, toks = vehicles[j]
        if len(toks) < 3:
            raise ParseError("vehicle line needs: id x y speed [required ids]", lineno)
        x, y, speed = (_number(tok, lineno, what) for tok, what in zip(toks, ("x", "y", "speed")))
        req = [_integer(tok, lineno, "required target") for tok in toks[3:]]
        for t in req:
            if not 0 <= t < n:
                raise ParseError(f"vehicle {j} requires unknown target {t}", lineno)
            if t in claimed:
                raise ParseError(
                    f"target {t} is required by both vehicle {claimed[t]} and vehicle {j}", lineno
                )
            claimed[t] = j
        try:
            specs.append(VehicleSpec(Point(x, y), speed, frozenset(req)))
        except InvalidInputError as exc:
            raise ParseError(str(exc), lineno) from None
    try:
        return Instance(header["NAME"], pts, specs)
    except ParseError:
        raise
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from None


def write_instance(inst: Instance) -> str:
    out = [
        f"NAME: {inst.name}",
        f"VEHICLES: {inst.k}",
        f"TARGETS: {inst.n}",
        "VEHICLE_SECTION",
        "# id depot_x depot_y speed [required target ids...]",
    ]
    for j, v in enumerate(inst.vehicles):
        req = " ".join(str(t) for t in sorted(v.required))
        out.append(f"{j} {v.depot.x!r} {v.depot.y!r} {v.speed!r} {req}".rstrip())
    out.append("TARGET_SECTION")
    out.append("# id x y")
    for t, p in enumerate(inst.targets):
        out.append(f"{t} {p.x!r} {p.y!r}")
    out.append("EOF")
    return "\n".join(out) + "\n"


def read_instance(path: str | os.PathLike) -> Instance:
    return parse_instance(Path(path).read_text())


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    Path(path).write_text(write_instance(inst))


@dataclass
class ResultRow:
    instance: str
    config: str
    objective: float
    wall_s: float
    seed: int
    runs: int
    status: str = "ok"

    @property
    def ok(self) -> bool:
        """True when the row carries a feasible objective (status ``ok`` or ``truncated``)."""
        return not self.status.startswith("error")


def append_result(path: str | os.PathLike, row: ResultRow) -> None:
    """Append one row, writing the header first if the file is new; flushed immediately."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(RESULT_FIELDS)
        writer.writerow(
            [row.instance, row.config, repr(float(row.objective)), f"{row.wall_s:.3f}", row.seed, row.runs, row.status]
        )
        fh.flush()


def read_results(path: str | os.PathLike) -> list[ResultRow]:
    with Path(path).open(newline="") as fh:
        return list(_rows(csv.DictReader(fh)))


def _rows(reader: Iterable[dict]) -> Iterator[ResultRow]:
    for rec in reader:
        yield ResultRow(
            rec["instance"],
            rec["config"],
            float(rec["objective"]) if rec["objective"] not in ("", "nan") else float("nan"),
            float(rec["wall_s"]),
            int(rec["seed"]),
            int(rec["runs"]),
            rec["status"],
        )


def solution_to_dict(inst: Instance, sol: Solution) -> dict:
    return {
        "instance": inst.name,
        "objective": sol.objective,
        "tours": [{"vehicle": t.vehicle, "order": list(t.order), "cost": t.cost} for t in sol.tours],
    }


def save_solution(inst: Instance, sol: Solution, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(inst, sol), indent=2) + "\n")


def row_dict(row: ResultRow) -> dict:
    return asdict(row)

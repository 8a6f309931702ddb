import itertools

import numpy as np
import pytest

from hetmmtsp import Instance, VehicleSpec, make_solution
from hetmmtsp.instgen import SPEED_SET


def random_instance(rng, n, k, req_per=0, extent=100.0, name="rand", speeds=True):
    """Uniform targets and depots; optional random speeds and ``req_per`` required targets per vehicle."""
    pts = rng.uniform(0, extent, size=(n, 2)).tolist()
    deps = rng.uniform(0, extent, size=(k, 2)).tolist()
    perm = rng.permutation(n).tolist()
    vehicles = []
    for j in range(k):
        v = float(rng.choice(SPEED_SET)) if speeds else 1.0
        req = perm[j * req_per:(j + 1) * req_per]
        vehicles.append(VehicleSpec(deps[j], v, frozenset(req)))
    return Instance(name, pts, vehicles)


def random_solution(inst, rng):
    """Feasible solution with free targets scattered at random, tours in random order."""
    members = [list(v.required) for v in inst.vehicles]
    for t in inst.free_targets():
        members[int(rng.integers(inst.k))].append(t)
    return make_solution(inst, [rng.permutation(m).tolist() for m in members])


def brute_tsp_length(inst, j, targets):
    """Shortest closed tour length by enumerating permutations (tiny sets only)."""
    dep = inst.depot(j)
    d = inst.dist
    best = 0.0 if not targets else np.inf
    for perm in itertools.permutations(targets):
        route = (dep, *perm, dep)
        best = min(best, sum(d[a][b] for a, b in zip(route, route[1:])))
    return best / inst.speed(j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


#: (criterion number, passed, detail) lines filled in by test_acceptance
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")

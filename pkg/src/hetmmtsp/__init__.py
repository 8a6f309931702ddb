"""Heuristic solver for the heterogeneous min-max multi-vehicle multi-depot TSP."""

from .construct import (
    ConstructionMethod,
    balanced_assignment_construct,
    construct,
    insertion_cost_single,
    recursive_insertion,
)
from .errors import (
    CapacityError,
    GenerationError,
    HetMMError,
    InvalidInputError,
    InvalidMoveError,
    ParseError,
)
from .instgen import HeterogeneityMode, assign_required_targets, assign_speeds, generate_suite
from .model import (
    Instance,
    Point,
    Solution,
    Tour,
    ValidationReport,
    VehicleSpec,
    make_solution,
    make_tour,
    tour_cost,
    validate_solution,
)
from .neighborhoods import (
    FixedSort,
    GroupInsertion,
    MultiSwapConfig,
    Structure,
    SwitchSwapConfig,
    VehicleSortMetric,
    group_insertion_cost,
    group_savings,
    neighborhood_multiswap,
    neighborhood_swap,
    neighborhood_switch,
    removal_ratio,
    savings,
    sort_vehicles,
)
from .oracle import OracleLimit, OracleResult, brute_force_minmax
from .solver import SolveResult, SolverConfig, local_search, perturbation_round, solve
from .tourkit import TourOptimizerBudget, exact_tsp_held_karp, optimize_tour

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

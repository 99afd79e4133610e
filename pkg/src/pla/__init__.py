"""Online joint pricing and inventory with transportation allocation."""

from .core import (
    ConfigError,
    ExperimentConfig,
    MarketParams,
    TheoremConstants,
    load_config,
    theorem_constants,
    validate_config,
)
from .environment import DemandModel, FiniteSupport, TruncatedGaussian, realized_cost, sample_demand
from .intervals import build_intervals
from .meta import run, select_agent
from .saa import exact_Q, exact_W, global_optimum, saa_argmin_inventory
from .transport import brute_force_allocation, extract_duals, solve_allocation

__all__ = [
    "ConfigError",
    "DemandModel",
    "ExperimentConfig",
    "FiniteSupport",
    "MarketParams",
    "TheoremConstants",
    "TruncatedGaussian",
    "brute_force_allocation",
    "build_intervals",
    "exact_Q",
    "exact_W",
    "extract_duals",
    "global_optimum",
    "load_config",
    "realized_cost",
    "run",
    "saa_argmin_inventory",
    "sample_demand",
    "select_agent",
    "solve_allocation",
    "theorem_constants",
    "validate_config",
]

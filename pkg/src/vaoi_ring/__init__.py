"""Optimal VAoI update policies for an energy-harvesting source feeding a LEO ring."""
from .core import ParamError, State, SystemParams, load_config, validate_params
from .mdp import ConvergenceError, build_kernel, extract_thresholds, solve, solve_rvia
from .policies import PolicyTable, greedy_policy, rs_policy
from .sim import evaluate_policy, simulate_link, simulate_ring

__all__ = [
    "ConvergenceError",
    "ParamError",
    "PolicyTable",
    "State",
    "SystemParams",
    "build_kernel",
    "evaluate_policy",
    "extract_thresholds",
    "greedy_policy",
    "load_config",
    "rs_policy",
    "simulate_link",
    "simulate_ring",
    "solve",
    "solve_rvia",
    "validate_params",
]

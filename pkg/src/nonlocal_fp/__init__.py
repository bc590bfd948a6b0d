"""Pseudospectral solver and property checks for a nonlocal Fokker-Planck equation on the torus."""

from .biasing import BiasState, conditional_force, evolve_denominator, marginal
from .config import RunConfig, parse_config, render_config
from .diagnostics import CHECKS, PropertyReport, RunHistory
from .evolution import StepControl, advance, make_state, rhs_F, run, step_imex, step_picard
from .grid import Grid, integrate, make_grid, spectral_derivative
from .output import emit_snapshot, load_snapshot
from .potential import PotentialSpec, compute_delta, parse_potential
from .semigroup import heat_propagate, lp_norm, operator_norm, sobolev_norm, verify_spa_estimates

__all__ = [
    "BiasState", "conditional_force", "evolve_denominator", "marginal",
    "RunConfig", "parse_config", "render_config",
    "CHECKS", "PropertyReport", "RunHistory",
    "StepControl", "advance", "make_state", "rhs_F", "run", "step_imex", "step_picard",
    "Grid", "integrate", "make_grid", "spectral_derivative",
    "emit_snapshot", "load_snapshot",
    "PotentialSpec", "compute_delta", "parse_potential",
    "heat_propagate", "lp_norm", "operator_norm", "sobolev_norm", "verify_spa_estimates",
]

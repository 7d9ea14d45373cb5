"""Quasi-static phase-field simulation of crack networks in thin films.

A brittle elastic film bonded to a rigid displacing substrate by an
elastic adhesive develops networks of cracks as the substrate stretches.
This package provides the 2D phase-field simulator (alternate
minimization of a separately quadratic energy with optional
irreversibility constraints) together with the closed-form 1D toolkit
that predicts crack spacing and transition times.
"""

from .analytic1d import (
    Bar1DParams,
    Layer1DQuery,
    critical_time,
    decay_rate,
    delta2,
    f_hat,
    halving_times,
    layer_point,
    layer_width,
    optimal_crack_count,
    u_continuous,
    verify_centered_optimality,
)
from .config import EvolutionConfig, parse_config, serialize_config
from .core import (
    EnergyBreakdown,
    LoadKind,
    LoadProgram,
    MaterialParams,
    PlaneRegime,
    elastic_density,
    lame_from_young_poisson,
    total_energy,
)
from .errors import ConfigError, ConvergenceError, ParameterError
from .evolution import (
    CrackEvent,
    CrackPattern,
    EvolutionTrace,
    StepRecord,
    crack_pattern,
    energy_balance_residual,
    run_evolution,
    slope_u,
    slope_v_unilateral,
)
from .fem import (
    BoundaryCondition,
    SparseSPD,
    assemble_u_system,
    assemble_v_system,
    quadrature_energy,
)
from .mesh import Field, Mesh, build_interval, build_rectangle
from .solvers import SolveReport, solve_box_qp, solve_spd
from .staggered import IrreversibilityMode, StaggeredReport, staggered_step

__all__ = [
    "Bar1DParams",
    "BoundaryCondition",
    "ConfigError",
    "ConvergenceError",
    "CrackEvent",
    "CrackPattern",
    "EnergyBreakdown",
    "EvolutionConfig",
    "EvolutionTrace",
    "Field",
    "IrreversibilityMode",
    "Layer1DQuery",
    "LoadKind",
    "LoadProgram",
    "MaterialParams",
    "Mesh",
    "ParameterError",
    "PlaneRegime",
    "SolveReport",
    "SparseSPD",
    "StaggeredReport",
    "StepRecord",
    "assemble_u_system",
    "assemble_v_system",
    "build_interval",
    "build_rectangle",
    "crack_pattern",
    "critical_time",
    "decay_rate",
    "delta2",
    "elastic_density",
    "energy_balance_residual",
    "f_hat",
    "halving_times",
    "lame_from_young_poisson",
    "layer_point",
    "layer_width",
    "optimal_crack_count",
    "parse_config",
    "quadrature_energy",
    "run_evolution",
    "serialize_config",
    "slope_u",
    "slope_v_unilateral",
    "solve_box_qp",
    "solve_spd",
    "staggered_step",
    "total_energy",
    "u_continuous",
    "verify_centered_optimality",
]

__version__ = "0.1.0"

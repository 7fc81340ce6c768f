"""Joint downlink bandwidth allocation and base-station cooperation.

Computes exact and approximate Cournot-Nash equilibria of the
transport-cost-plus-fairness objective over randomly deployed cellular
networks (Poisson or beta-Ginibre stations), and locates the optimum
network working point where user satisfaction meets network load.
"""

from .config import Config, parse_config
from .equilibria import (
    Diagnostics,
    Equilibrium,
    ExactProblem,
    approx_allocate,
    approx_solve,
    objective_value,
    project_sum_one_zerofix,
    simplex_project_oracle,
    solve_exact,
)
from .errors import (
    CnAllocError,
    ConfigError,
    DegenerateInstanceError,
    DegenerateProjectionError,
    InfeasibleMarginalsError,
    InvalidParameterError,
    NonConvergenceError,
    ProvablyInfeasibleError,
)
from .geometry import PointPattern, Window, sample_beta_ginibre, sample_poisson
from .io import (
    emit_instance_json,
    emit_plot,
    emit_sweep_csv,
    load_sweep_csv,
    recompute_indicators_from_json,
)
from .metrics import (
    Crossing,
    Indicators,
    InstanceResult,
    SweepResult,
    find_crossing,
    indicators,
    run_instance,
    sweep,
)
from .radio import RadioInstance, RadioParams, build_instance, compute_sinr, demand_vector
from .transport import Marginal, TransportPlan, balance_marginals, solve_transport

__version__ = "0.1.0"

__all__ = [
    "Config",
    "Crossing",
    "CnAllocError",
    "ConfigError",
    "DegenerateInstanceError",
    "DegenerateProjectionError",
    "Diagnostics",
    "Equilibrium",
    "ExactProblem",
    "Indicators",
    "InfeasibleMarginalsError",
    "InstanceResult",
    "InvalidParameterError",
    "Marginal",
    "NonConvergenceError",
    "PointPattern",
    "ProvablyInfeasibleError",
    "RadioInstance",
    "RadioParams",
    "SweepResult",
    "TransportPlan",
    "Window",
    "approx_allocate",
    "approx_solve",
    "balance_marginals",
    "build_instance",
    "compute_sinr",
    "demand_vector",
    "emit_instance_json",
    "emit_plot",
    "emit_sweep_csv",
    "find_crossing",
    "indicators",
    "load_sweep_csv",
    "objective_value",
    "parse_config",
    "project_sum_one_zerofix",
    "recompute_indicators_from_json",
    "run_instance",
    "sample_beta_ginibre",
    "sample_poisson",
    "simplex_project_oracle",
    "solve_exact",
    "sweep",
]

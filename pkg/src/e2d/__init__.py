"""Anytime estimation-to-decisions policies and DEC saddle-point solvers."""

from .instances import (
    FiniteInstance,
    LinearInstance,
    SimplexVector,
    check_reward_data_processing,
    delta_vector,
    gap_matrix,
    info_matrix,
    load_instance,
    shifted_gap_matrix,
)
from .dec_finite import (
    DecSolution,
    SolverError,
    dec_ac,
    dec_ac_shifted,
    dec_constrained_oracle,
    dec_offset,
    generalized_dec_bound,
    info_ratio,
    max_info_ratio,
    pac_dec,
)
from .dec_linear import (
    DesignState,
    build_design_state,
    frank_wolfe_min,
    g_optimal_value,
    linear_dec_objective,
    solve_linear_dec,
    solve_linear_dec_joint,
)
from .rng import RngStream, derive_seed

__version__ = "0.1.0"

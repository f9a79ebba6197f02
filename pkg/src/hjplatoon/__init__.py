"""Hamilton-Jacobi reachability safe sets and safety filtering for a
three-car highway platoon in relative coordinates."""

from .dynamics import (
    ActuationBounds,
    ConstraintBox,
    constraint_margin,
    flow2,
    flow4,
)
from .grid import Grid
from .hamiltonian import (
    DisturbanceModel,
    dissipation_bounds,
    hamiltonian,
    optimal_control,
    optimal_d1,
    optimal_d2_baseline,
    optimal_d2_reaction,
)
from .idm import IdmParams, desired_gap, follower_speed, idm_accel
from .safe_set import (
    SafetyFilterConfig,
    extract_slice,
    gradient_at,
    is_safe,
    safe_volume_fraction,
    safety_filter,
    value_at,
)
from .sim import Trace, run, step_sim, trajectory_payoff
from .solver import (
    SolveResult,
    SolverSettings,
    ValueField,
    initialize,
    lf_numerical_hamiltonian,
    one_sided_gradients,
    solve,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "ActuationBounds",
    "ConstraintBox",
    "DisturbanceModel",
    "Grid",
    "IdmParams",
    "SafetyFilterConfig",
    "SolveResult",
    "SolverSettings",
    "Trace",
    "ValueField",
    "constraint_margin",
    "desired_gap",
    "dissipation_bounds",
    "extract_slice",
    "flow2",
    "flow4",
    "follower_speed",
    "gradient_at",
    "hamiltonian",
    "idm_accel",
    "initialize",
    "is_safe",
    "lf_numerical_hamiltonian",
    "one_sided_gradients",
    "optimal_control",
    "optimal_d1",
    "optimal_d2_baseline",
    "optimal_d2_reaction",
    "run",
    "safe_volume_fraction",
    "safety_filter",
    "solve",
    "step",
    "step_sim",
    "trajectory_payoff",
    "value_at",
]

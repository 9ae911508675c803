"""Typhoid fever transmission model with information-driven behaviour change.

Simulation (``integrate``), reproduction number and stability analysis
(``analysis``) and a command-line front end (``typhoid_info.cli``).
"""

from .analysis import (
    dfe_local_stability,
    disease_free_equilibrium,
    endemic_equilibrium,
    jacobian,
    lyapunov_gap,
    lyapunov_value,
    metzler_decomposition,
    ngm_matrices,
    r0_closed_form,
    r0_ngm,
    r0_sensitivity,
)
from .integrate import SolverConfig, Trajectory, integrate, run_to_steady_state, step_rk4
from .linalg import eigenvalues4
from .model import (
    Derivative,
    Parameters,
    State,
    conservation_residual,
    force_of_infection,
    gamma,
    rhs,
    total_population,
)

__version__ = "0.1.0"

__all__ = [
    "Derivative",
    "Parameters",
    "SolverConfig",
    "State",
    "Trajectory",
    "conservation_residual",
    "dfe_local_stability",
    "disease_free_equilibrium",
    "eigenvalues4",
    "endemic_equilibrium",
    "force_of_infection",
    "gamma",
    "integrate",
    "jacobian",
    "lyapunov_gap",
    "lyapunov_value",
    "metzler_decomposition",
    "ngm_matrices",
    "r0_closed_form",
    "r0_ngm",
    "r0_sensitivity",
    "rhs",
    "run_to_steady_state",
    "step_rk4",
    "total_population",
]

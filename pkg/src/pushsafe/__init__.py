"""Contact-force, thrust-saturation and risk analysis for a pushing aerial manipulator."""
from .errors import (
    ConfigError,
    DegenerateGeometry,
    InvalidInput,
    NegativeThrust,
    NonMonotone,
    NotBracketed,
    NumericalBlowup,
    PushSafeError,
)
from .model import (
    ALPHA_TOL_DEG,
    EquilibriumSolution,
    OperationPoint,
    VehicleParams,
    contact_force,
    contact_force_slope,
    equilibrium_residuals,
    rotor_pair_thrusts,
    solve_equilibrium,
    sweep_curves,
    total_thrust,
)
from .planner import CampaignPlan, CampaignReport, ExperimentCase, Outcome, build_plan, execute_plan, reference_grid
from .safety import (
    ActuationLimits,
    Assessment,
    Zone,
    ZoneBoundaries,
    calibrate_limits,
    classify,
    risk,
    thrust_boundary,
    upper_roll_bound,
    zone_table,
)
from .sim import SimConfig, SimResult, SimState, run_to_equilibrium, step

__version__ = "0.1.0"

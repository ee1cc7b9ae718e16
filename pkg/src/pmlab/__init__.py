"""pmlab: a desk-scale laboratory for forward-backward diffusion fronts."""

__version__ = "0.1.0"

from .barriers import (
    BarrierFBP1,
    BarrierFBP2,
    ConeSet,
    auto_barrier_fbp1,
    auto_barrier_fbp2,
    check_comparison,
    eval_psi,
    eval_w1,
    eval_w2,
    select_eps0_c2,
    select_lambda,
    verify_w1,
    verify_w2,
)
from .counterexample import (
    TaylorDatum,
    convexity_margin,
    crosscheck_fd,
    datum_from_n,
    dini_condition,
    find_min_n,
    vt_origin,
)
from .experiments import default_config, load_config, run_scenario, run_sweep
from .nonlinearity import (
    ConcretePM,
    NonlinearityProfile,
    Tabulated,
    check_hypotheses,
    coeff_g,
    constants,
    eval_phi,
    h_inverse,
    profile_by_name,
    truncated_flux_h,
)
from .regions import (
    ExpansionSet,
    FrontTrajectory,
    RegionSnapshot,
    check_expansion_rate,
    check_monotone_inclusion,
    check_supgrad_bound,
    heuristic_speed,
    measured_speed,
    nonexistence_certificate,
    subcritical_intervals,
    track_front,
)
from .solvers import (
    Field1D,
    Grid1D,
    Patch2D,
    RunConfig,
    SemidiscreteRhs,
    Trajectory,
    integrate,
    patch2d_time_derivative,
    rhs_fbp1,
    rhs_fbp2,
    rhs_pm1d,
    rhs_pm_radial,
    step_adaptive,
    transform_u_to_v,
)

__all__ = [
    "BarrierFBP1",
    "BarrierFBP2",
    "ConcretePM",
    "ConeSet",
    "ExpansionSet",
    "Field1D",
    "FrontTrajectory",
    "Grid1D",
    "NonlinearityProfile",
    "Patch2D",
    "RegionSnapshot",
    "RunConfig",
    "SemidiscreteRhs",
    "Tabulated",
    "TaylorDatum",
    "Trajectory",
    "auto_barrier_fbp1",
    "auto_barrier_fbp2",
    "check_comparison",
    "check_expansion_rate",
    "check_hypotheses",
    "check_monotone_inclusion",
    "check_supgrad_bound",
    "coeff_g",
    "constants",
    "convexity_margin",
    "crosscheck_fd",
    "datum_from_n",
    "default_config",
    "dini_condition",
    "eval_phi",
    "eval_psi",
    "eval_w1",
    "eval_w2",
    "find_min_n",
    "h_inverse",
    "heuristic_speed",
    "integrate",
    "load_config",
    "measured_speed",
    "nonexistence_certificate",
    "patch2d_time_derivative",
    "profile_by_name",
    "rhs_fbp1",
    "rhs_fbp2",
    "rhs_pm1d",
    "rhs_pm_radial",
    "run_scenario",
    "run_sweep",
    "select_eps0_c2",
    "select_lambda",
    "step_adaptive",
    "subcritical_intervals",
    "track_front",
    "transform_u_to_v",
    "truncated_flux_h",
    "verify_w1",
    "verify_w2",
    "vt_origin",
    "__version__",
]

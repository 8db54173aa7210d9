"""First-order optimization with relatively inexact gradients.

The library centers on one iteration: an inner extrapolation and a gradient
extrapolation driven by momentum coefficients, followed by a fixed-step
update along an approximate gradient whose error is bounded relative to its
own norm.  Extragradient, sharpness-aware, and inexact proximal point
updates are the same iteration with particular approximate gradients, and
derivative-free runs obtain theirs from adaptive finite differencing.
Runs carry evaluation meters, optional budgets, and a per-iteration descent
certificate that can be re-verified offline.
"""

from .core import (
    BacktrackExhaustedError,
    BudgetExhaustedError,
    DimensionMismatchError,
    EvalCounters,
    InfeasibleParametersError,
    InnerSolveError,
    NonFiniteValueError,
    Objective,
    RunTrace,
    TraceRecord,
    as_point,
    euclidean_norm,
)
from .rng import SplitMix64
from .oracles import (
    AdaptiveDeltaPolicy,
    FiniteDiffScheme,
    InexactGradientResult,
    NoiseModel,
    central_difference,
    fd_error_bound,
    forward_difference,
    inexact_gradient,
    noisy_wrap,
)
from .momentum import (
    FeasibilityResult,
    MomentumSchedule,
    ScheduleBounds,
    beta_gamma,
    feasibility_check,
    schedule_bounds,
)
from .prox import (
    MoreauEnvelope,
    ProxFunction,
    ProxResult,
    catalog,
    envelope_objective,
    inexact_prox,
    moreau_gradient,
    moreau_value,
    prox_eval,
)
from .problems import (
    ProblemInstance,
    gen_image_restoration,
    gen_least_squares,
    gen_plk_test,
    image_restoration_instance,
    least_squares_instance,
)
from .solvers import (
    SolverParams,
    StepResult,
    egm_g,
    exact_gradient_supplier,
    extragradient_supplier,
    finite_difference_supplier,
    igdm_step,
    ippm_g,
    proximal_supplier,
    run,
    samm_g,
    sharpness_supplier,
)
from .diagnostics import (
    DescentViolation,
    LyapunovConstants,
    RateFit,
    attach_lyapunov,
    check_descent,
    descent_flags,
    fit_rate,
    lyapunov_constants,
    lyapunov_value,
)
from .harness import (
    METHODS,
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    emit_csv,
    evals_to_target,
    read_trace_csv,
    run_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveDeltaPolicy",
    "BacktrackExhaustedError",
    "BudgetExhaustedError",
    "ConfigError",
    "DescentViolation",
    "DimensionMismatchError",
    "EvalCounters",
    "ExperimentConfig",
    "FeasibilityResult",
    "FiniteDiffScheme",
    "InexactGradientResult",
    "InfeasibleParametersError",
    "InnerSolveError",
    "LyapunovConstants",
    "METHODS",
    "MomentumSchedule",
    "MoreauEnvelope",
    "NoiseModel",
    "NonFiniteValueError",
    "Objective",
    "ProblemInstance",
    "ProxFunction",
    "ProxResult",
    "RateFit",
    "RunTrace",
    "ScheduleBounds",
    "SolverParams",
    "SplitMix64",
    "StepResult",
    "TraceRecord",
    "as_point",
    "attach_lyapunov",
    "beta_gamma",
    "catalog",
    "central_difference",
    "check_descent",
    "config_from_dict",
    "descent_flags",
    "egm_g",
    "emit_csv",
    "envelope_objective",
    "euclidean_norm",
    "evals_to_target",
    "exact_gradient_supplier",
    "extragradient_supplier",
    "fd_error_bound",
    "feasibility_check",
    "finite_difference_supplier",
    "fit_rate",
    "forward_difference",
    "gen_image_restoration",
    "gen_least_squares",
    "gen_plk_test",
    "igdm_step",
    "image_restoration_instance",
    "inexact_gradient",
    "inexact_prox",
    "ippm_g",
    "least_squares_instance",
    "lyapunov_constants",
    "lyapunov_value",
    "moreau_gradient",
    "moreau_value",
    "prox_eval",
    "proximal_supplier",
    "read_trace_csv",
    "run",
    "run_matrix",
    "samm_g",
    "schedule_bounds",
    "sharpness_supplier",
]

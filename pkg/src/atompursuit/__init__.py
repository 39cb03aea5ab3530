"""Greedy and randomized pursuit over finite symmetric dictionaries.

Solvers step along dictionary atoms chosen by a linear minimization oracle
(exact, subsampled, or random), with optional momentum acceleration; the
analysis helpers compute the geometric constants behind certified
convergence envelopes.
"""

from ._kernels import BACKEND as kernel_backend
from ._kernels import available_backends
from .accel import (
    AccelDiagnostics,
    MetricP,
    NuEstimate,
    UnsupportedDistributionError,
    compute_metric,
    estimate_nu,
    model_psi_value,
    run_accel_mp,
    run_accel_rp,
    solve_alpha,
)
from .analysis import (
    ConstantsReport,
    affine_invariance_check,
    compute_delta_hat_sq,
    compute_mdw,
    envelope,
    level_set_radius_atomic,
    max_atomic_norm,
    mdw_spectral_lower_bound,
    trace_atomic_radius,
)
from .atoms import (
    AtomSet,
    LmoResult,
    SamplingDistribution,
    SpanMembershipError,
    as_vector,
    atomic_norm,
    dual_atomic_norm,
    lmo_approx,
    lmo_exact,
    load_dictionary,
    sample_atom,
    save_dictionary,
)
from .experiments import (
    METHODS,
    NU_POLICIES,
    ExperimentConfig,
    ExperimentResult,
    gen_coordinate_synthetic,
    gen_synthetic,
    load_regression,
    make_regression_standin,
    run_experiment,
)
from .objectives import (
    AffineReparametrized,
    LeastSquares,
    Objective,
    Quadratic,
    SquaredDistance,
    bregman_gap,
    check_gradient,
    compute_L_atomic,
    compute_mu_atomic_lower,
    estimate_L_atomic_generic,
    quadratic_optimum,
)
from .simplexlp import InfeasibleError, UnboundedError, solve_standard_form
from .solvers import (
    ApproxOracle,
    AtomicSmoothness,
    ExactOracle,
    L2Smoothness,
    NumericalFailure,
    RandomOracle,
    SolverConfig,
    SolverTrace,
    affine_mp_step,
    mp_step,
    read_traces_csv,
    run_pursuit,
    run_random_cd,
    run_steepest_cd,
    write_trace_csv,
    write_traces_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AccelDiagnostics",
    "affine_invariance_check",
    "affine_mp_step",
    "AffineReparametrized",
    "ApproxOracle",
    "as_vector",
    "atomic_norm",
    "AtomicSmoothness",
    "AtomSet",
    "available_backends",
    "bregman_gap",
    "check_gradient",
    "compute_delta_hat_sq",
    "compute_L_atomic",
    "compute_mdw",
    "compute_metric",
    "compute_mu_atomic_lower",
    "ConstantsReport",
    "dual_atomic_norm",
    "envelope",
    "estimate_L_atomic_generic",
    "estimate_nu",
    "ExactOracle",
    "ExperimentConfig",
    "ExperimentResult",
    "gen_coordinate_synthetic",
    "gen_synthetic",
    "InfeasibleError",
    "kernel_backend",
    "L2Smoothness",
    "LeastSquares",
    "level_set_radius_atomic",
    "lmo_approx",
    "lmo_exact",
    "LmoResult",
    "load_dictionary",
    "load_regression",
    "make_regression_standin",
    "max_atomic_norm",
    "mdw_spectral_lower_bound",
    "METHODS",
    "MetricP",
    "model_psi_value",
    "mp_step",
    "NU_POLICIES",
    "NuEstimate",
    "NumericalFailure",
    "Objective",
    "Quadratic",
    "quadratic_optimum",
    "RandomOracle",
    "read_traces_csv",
    "run_accel_mp",
    "run_accel_rp",
    "run_experiment",
    "run_pursuit",
    "run_random_cd",
    "run_steepest_cd",
    "sample_atom",
    "SamplingDistribution",
    "save_dictionary",
    "solve_alpha",
    "solve_standard_form",
    "SolverConfig",
    "SolverTrace",
    "SpanMembershipError",
    "SquaredDistance",
    "trace_atomic_radius",
    "UnboundedError",
    "UnsupportedDistributionError",
    "write_trace_csv",
    "write_traces_csv",
]

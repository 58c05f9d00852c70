"""Exact and spectral numerics for Dirac operators on flat tori.

Layers, roughly bottom up:

- `clifford`: exact gamma matrices, the antilinear symmetry J, fiber algebra.
- `radial`: exact rational calculus on radial-times-monomial spinor terms,
  including closed-form preimages under the flat Dirac operator.
- `special`: the two Bessel orders the radial profiles need.
- `green`: fundamental solutions at fixed frequency, their leading singular
  parts, a distributional-identity verifier, and a periodic mode sum.
- `torus`: flat torus geometries, spinor grids, FFT Dirac operators,
  conformal families, field serialization.
- `spectral`: low-lying eigenvalue/eigenfield solver with cluster and
  simplicity reporting.
- `perturb`: first-order conformal spectral response, finite-difference
  cross-checks, branch tracking.
- `zeroset`: zero-candidate detection with resolution-aware thresholds,
  genericity sampling, exact index bookkeeping.
"""

from .clifford import (
    FIBER_DIM,
    SpinorFiber,
    apply_j,
    clifford_mul,
    make_fiber,
    real_orthogonal_basis,
    volume_element,
)
from .green import (
    AnalyticSpinor,
    GreenKernel,
    QuadratureError,
    annulus_spinor,
    expansion_remainder,
    f_lambda,
    f_lambda_deriv,
    gaussian_spinor,
    green_eval,
    green_leading,
    ode_residual,
    torus_green_mode_sum,
    verify_distributional_identity,
)
from .perturb import (
    BranchTrackingError,
    FDResult,
    SplitReport,
    cluster_rate_matrix,
    dirac_t_derivative,
    eigenvalue_derivative,
    fd_derivative,
    split_experiment,
)
from .radial import (
    PreimageError,
    RadialSpinor,
    RationalComplex,
    admissible_k_range,
    dirac_preimage,
    dirac_symbolic,
    laplacian_symbolic,
    partial_derivative,
    radial_normal_form,
    second_order_check,
    space_generators,
)
from .spectral import EigenPair, SolverError, SpectrumReport, check_simple, eigensolve, kernel_dim
from .torus import (
    ConformalFamily,
    SpinorField,
    TorusSpinGeometry,
    apply_j_field,
    dirac_conformal,
    dirac_flat,
    dirac_squared_flat,
    grad_mul,
    l2_inner,
    l2_norm,
    load_field,
    normalized,
    plane_wave,
    pointwise_scale,
    random_band_spinor,
    random_trig_scalar,
    save_field,
)
from .zeroset import (
    GenericityStats,
    MinModulusResult,
    ZeroCandidate,
    a_hat_complete_intersection,
    default_zero_threshold,
    genericity_trial,
    lipschitz_bound,
    min_modulus,
    poincare_hopf_budget,
    zero_report,
)

__version__ = "0.1.0"

__all__ = [
    "FIBER_DIM",
    "SpinorFiber",
    "apply_j",
    "clifford_mul",
    "make_fiber",
    "real_orthogonal_basis",
    "volume_element",
    "AnalyticSpinor",
    "GreenKernel",
    "QuadratureError",
    "annulus_spinor",
    "expansion_remainder",
    "f_lambda",
    "f_lambda_deriv",
    "gaussian_spinor",
    "green_eval",
    "green_leading",
    "ode_residual",
    "torus_green_mode_sum",
    "verify_distributional_identity",
    "BranchTrackingError",
    "FDResult",
    "SplitReport",
    "cluster_rate_matrix",
    "dirac_t_derivative",
    "eigenvalue_derivative",
    "fd_derivative",
    "split_experiment",
    "PreimageError",
    "RadialSpinor",
    "RationalComplex",
    "admissible_k_range",
    "dirac_preimage",
    "dirac_symbolic",
    "laplacian_symbolic",
    "partial_derivative",
    "radial_normal_form",
    "second_order_check",
    "space_generators",
    "EigenPair",
    "SolverError",
    "SpectrumReport",
    "check_simple",
    "eigensolve",
    "kernel_dim",
    "ConformalFamily",
    "SpinorField",
    "TorusSpinGeometry",
    "apply_j_field",
    "dirac_conformal",
    "dirac_flat",
    "dirac_squared_flat",
    "grad_mul",
    "l2_inner",
    "l2_norm",
    "load_field",
    "normalized",
    "plane_wave",
    "pointwise_scale",
    "random_band_spinor",
    "random_trig_scalar",
    "save_field",
    "GenericityStats",
    "MinModulusResult",
    "ZeroCandidate",
    "a_hat_complete_intersection",
    "default_zero_threshold",
    "genericity_trial",
    "lipschitz_bound",
    "min_modulus",
    "poincare_hopf_budget",
    "zero_report",
]

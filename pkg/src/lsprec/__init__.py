"""Precision-matrix estimation and structure testing for locally
stationary time series.

The package fits the Cholesky factor of the inverse covariance of a
single observed realization through sieve least squares, row by row,
and builds L2-type tests for white noise and bandedness on top of the
fitted coefficients. See README.md for the full tour.
"""

from .cholfit import (
    BoundaryFit,
    SieveFit,
    build_design,
    fit_boundary,
    fit_interior,
    residuals,
)
from .errors import (
    ConfigError,
    IllConditionedError,
    KernelWindowError,
    NumericalError,
    PowerIterationError,
)
from .lrcov import (
    BlockBandedCov,
    assemble_score_cov,
    bandwidth_cv,
    cv_profile,
    epanechnikov,
    export_dense_csv,
    kernel_cov_block,
    psd_sqrt,
    score_series,
)
from .precision import (
    FitBundle,
    PrecisionEstimate,
    assemble,
    dense,
    dense_factor,
    estimate_precision,
    export_banded_csv,
    matvec,
    operator_norm_error,
)
from .procsim import (
    AssumptionParams,
    ModelSpec,
    TimeSeriesSample,
    derive_seed,
    make_rng,
    simulate,
    true_covariance,
    true_precision,
)
from .sievebasis import (
    BasisSet,
    basis_diagnostics,
    basis_matrix,
    evaluate_basis,
    orthonormality_gram,
)
from .structtest import (
    TestResult,
    decide,
    null_moments,
    riemann_statistic,
    run_test,
    simulate_null,
    statistic_banded,
    statistic_whitenoise,
)
from .tuning import (
    TuningGrids,
    TuningReport,
    cv_select_c,
    default_lag_cap,
    select_b,
    two_step,
)
from .varfit import VarianceEstimate, clamp_positive, estimate_variances

__version__ = "0.1.0"

__all__ = [
    "AssumptionParams",
    "BasisSet",
    "BlockBandedCov",
    "BoundaryFit",
    "ConfigError",
    "FitBundle",
    "IllConditionedError",
    "KernelWindowError",
    "ModelSpec",
    "NumericalError",
    "PowerIterationError",
    "PrecisionEstimate",
    "SieveFit",
    "TestResult",
    "TimeSeriesSample",
    "TuningGrids",
    "TuningReport",
    "VarianceEstimate",
    "assemble",
    "assemble_score_cov",
    "bandwidth_cv",
    "basis_diagnostics",
    "basis_matrix",
    "build_design",
    "clamp_positive",
    "cv_profile",
    "cv_select_c",
    "decide",
    "default_lag_cap",
    "dense",
    "dense_factor",
    "derive_seed",
    "epanechnikov",
    "estimate_precision",
    "estimate_variances",
    "evaluate_basis",
    "export_banded_csv",
    "export_dense_csv",
    "fit_boundary",
    "fit_interior",
    "kernel_cov_block",
    "make_rng",
    "matvec",
    "null_moments",
    "operator_norm_error",
    "orthonormality_gram",
    "psd_sqrt",
    "residuals",
    "riemann_statistic",
    "run_test",
    "score_series",
    "select_b",
    "simulate",
    "simulate_null",
    "statistic_banded",
    "statistic_whitenoise",
    "true_covariance",
    "true_precision",
    "two_step",
]

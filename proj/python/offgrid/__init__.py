"""Sparse mixture estimation over continuous location parameters.

Thin wrapper over the compiled core: dictionaries of translated scaled
features, the penalized least-squares solver, dual certificates, membership
and goodness-of-fit tests with theoretical thresholds, and kernel
approximation diagnostics.
"""

from ._core import (
    ApproxReport,
    Certificate,
    CertificateReport,
    FeatureFamily,
    FitResult,
    Mixture,
    NoiseModel,
    ObservationMeasure,
    OffgridError,
    Rng,
    SolverConfig,
    TestKind,
    TestOutcome,
    basis_colored,
    build_certificate,
    compute_CT,
    compute_VT,
    default_kappa,
    dirichlet_family,
    fit,
    fourier_basis,
    gaussian_family,
    gaussian_schedule,
    gram_matrix,
    gram_min_eigenvalue,
    grid_white,
    kappa_for_level,
    line_grid,
    observe,
    rho_detection,
    rho_quartic,
    risk_bound_goodness,
    run_test,
    sample_noise,
    synthesize,
    threshold_goodness,
    torus_grid,
    truncated_white,
    verify_certificate,
)

__all__ = [
    "ApproxReport",
    "Certificate",
    "CertificateReport",
    "FeatureFamily",
    "FitResult",
    "Mixture",
    "NoiseModel",
    "ObservationMeasure",
    "OffgridError",
    "Rng",
    "SolverConfig",
    "TestKind",
    "TestOutcome",
    "basis_colored",
    "build_certificate",
    "compute_CT",
    "compute_VT",
    "default_kappa",
    "dirichlet_family",
    "fit",
    "fourier_basis",
    "gaussian_family",
    "gaussian_schedule",
    "gram_matrix",
    "gram_min_eigenvalue",
    "grid_white",
    "kappa_for_level",
    "line_grid",
    "observe",
    "rho_detection",
    "rho_quartic",
    "risk_bound_goodness",
    "run_test",
    "sample_noise",
    "synthesize",
    "threshold_goodness",
    "torus_grid",
    "truncated_white",
    "verify_certificate",
]

__version__ = "0.1.0"

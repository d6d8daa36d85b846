"""Scattering by random periodic surfaces and statistical reconstruction.

Simulates time-harmonic plane-wave scattering by perfectly conducting random
periodic surfaces and reconstructs the surface's statistics (mean profile,
root mean square, correlation length) from noisy multi-frequency near-field
traces via a Monte Carlo ensemble of wavenumber-continuation inversions.
"""

from .errors import (
    ConfigError,
    DivergedError,
    GratingError,
    IllConditionedError,
    NumericalError,
    OrderViolationError,
    WoodAnomalyError,
)
from .surface import (
    CovarianceSpec,
    KLBasis,
    ProfileCoeffs,
    SurfaceSample,
    build_basis,
    evaluate_profile,
    kl_eigenvalue_closed_form,
    kl_eigenvalue_quadrature,
    project_onto_basis,
    sample_surface,
)
from .wavefield import (
    ModeSet,
    PlaneWave,
    green_quasiperiodic,
    incident_field,
    make_modes,
    make_plane_wave,
)
from .forward import (
    Measurement,
    RayleighCoeffs,
    reflection_efficiencies,
    solve_forward,
    standoff_height,
    synthesize_measurement,
)
from .inverse import (
    AngleTrace,
    LandweberConfig,
    StageTraces,
    continuation_reconstruct,
    deviation_rms,
    jacobian,
    landweber_run,
    objective,
    objective_vector,
    rayleigh_coefficients,
    regularized_psi,
)
from .uq import (
    EnsembleProblem,
    EnsembleResult,
    empirical_covariance,
    mean_profile,
    paired_eigenvalue_estimates,
    recover_statistics,
    recover_statistics_general,
    run_ensemble,
    sample_rng,
    sample_to_coeffs,
    std_profile,
    symmetric_eigenvalues,
)
from .config import ExperimentConfig, PRESETS

__version__ = "0.1.0"

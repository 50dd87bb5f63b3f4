"""Numerical laboratory for relative entropic uncertainty relations."""

__version__ = "0.1.0"

from .angular import (
    AngularSystem,
    angle_overlap,
    angle_povm_density,
    angle_state,
    continuum_sweep,
    discrete_angle_basis,
    lz_matrix,
    phase_state,
    reur_angular_experiment,
    verify_completeness,
)
from .entropy import (
    DiscreteDistribution,
    GriddedDensity,
    bin_density,
    continuum_limit_check,
    cross_entropy,
    differential_entropy,
    read_density_json,
    read_histogram_csv,
    relative_entropy_continuous,
    relative_entropy_discrete,
    shannon_entropy,
)
from .errors import (
    DimensionMismatchError,
    GridMismatchError,
    InfeasibleError,
    UnsupportedFamilyError,
    ValidationError,
)
from .experiments import run_angular, run_continuous, run_maxent_fit, run_verify
from .maxent import (
    MaxEntModel,
    MomentConstraint,
    fit_boltzmann,
    fit_gaussian,
    fit_general_moments,
    fit_uniform,
    fit_von_mises,
    model_from_json,
    model_to_json,
    to_density,
    to_distribution,
)
from .quantum import (
    DensityMatrix,
    OrthonormalBasis,
    Povm,
    computational_basis,
    fourier_basis,
    max_overlap_povm,
    max_overlap_pvm,
    maximally_mixed,
    measure_povm,
    measure_projective,
    measured_state,
    quantum_relative_entropy,
    random_density_matrix,
    random_orthonormal_basis,
    thermal_state,
    von_neumann_entropy,
)
from .reur import (
    ReurReport,
    RobertsonResult,
    check_normalization_covariance,
    continuous_general_report,
    evaluate_maassen_uffink,
    evaluate_reur_continuous,
    evaluate_reur_discrete,
    evaluate_reur_relative_only,
    evaluate_trivial_bound,
    robertson_strengthened,
    wavefunction_to_densities,
)
from .schemas import (
    AngularRequest,
    ContinuousRequest,
    MaxentFitRequest,
    VerifyRequest,
)
from .serialize import canonical_csv, canonical_json
from .service import create_app

__all__ = [name for name in dir() if not name.startswith("_")]

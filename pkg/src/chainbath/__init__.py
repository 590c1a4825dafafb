"""Gaussian dynamics of two oscillators coupled through a finite harmonic chain.

Builds the quadratic models, evolves Gaussian covariance matrices
exactly through normal-mode decomposition, and analyses entanglement
(logarithmic negativity, sudden-death phase diagrams) and the chain's
discrete spectral densities.
"""

__version__ = "0.1.0"

from .entanglement import (
    EntanglementTrace,
    PhaseLabel,
    TwoModeCovariance,
    analyze_window,
    classify_phase,
    log_negativity,
    partial_transpose,
    squeezing_witness,
    symplectic_eigenvalues,
)
from .errors import NonPhysicalStateError, NumericalError, ValidationError
from .gaussian import (
    CovarianceMatrix,
    InitialStateSpec,
    NormalModes,
    diagonalize,
    initial_covariance,
    mean_energy,
    propagate,
    propagator,
    reduced_propagator_rows,
    reduced_system_covariance,
    symplectic_form,
)
from .kernels import BACKEND as kernel_backend
from .model import (
    Attachment,
    DerivedQuantities,
    EdgePair,
    ModelParams,
    PMSplit,
    QuadraticModel,
    SingleEdge,
    SymmetricPair,
    build_bath,
    build_coupled,
    derived_quantities,
    pm_transform,
    separation,
)
from .spectral import (
    SpectralDensity,
    ZeroSet,
    closed_form_zeros,
    effective_bath_modes,
    locate_zeros_numeric,
    ohmic_fit,
    spectral_density,
    tune_epsilon,
)
from .sweep import (
    PhaseDiagram,
    SweepConfig,
    apply_profile,
    parse_config,
    preset_config,
    run_distance_scan,
    run_phase_diagram,
    run_time_series,
)

__all__ = [
    "Attachment",
    "CovarianceMatrix",
    "DerivedQuantities",
    "EdgePair",
    "EntanglementTrace",
    "InitialStateSpec",
    "ModelParams",
    "NonPhysicalStateError",
    "NormalModes",
    "NumericalError",
    "PMSplit",
    "PhaseDiagram",
    "PhaseLabel",
    "QuadraticModel",
    "SingleEdge",
    "SpectralDensity",
    "SweepConfig",
    "SymmetricPair",
    "TwoModeCovariance",
    "ValidationError",
    "ZeroSet",
    "analyze_window",
    "apply_profile",
    "build_bath",
    "build_coupled",
    "classify_phase",
    "closed_form_zeros",
    "derived_quantities",
    "diagonalize",
    "effective_bath_modes",
    "initial_covariance",
    "kernel_backend",
    "locate_zeros_numeric",
    "log_negativity",
    "mean_energy",
    "ohmic_fit",
    "parse_config",
    "partial_transpose",
    "pm_transform",
    "preset_config",
    "propagate",
    "propagator",
    "reduced_propagator_rows",
    "reduced_system_covariance",
    "run_distance_scan",
    "run_phase_diagram",
    "run_time_series",
    "separation",
    "spectral_density",
    "squeezing_witness",
    "symplectic_eigenvalues",
    "symplectic_form",
    "tune_epsilon",
]

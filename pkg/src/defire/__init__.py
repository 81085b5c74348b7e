"""Simulation and analysis of globally coupled degrade-and-fire oscillators."""

from .engine import (
    CycleResult,
    FiringOutcome,
    SimulationResult,
    evaluate_solution,
    first_firing,
    full_cycle,
    plateau_extent,
    repressor_level,
    s_value,
    simulate,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DefireError,
    HypothesisError,
    NonTerminationError,
    NotApplicableError,
    ProfileError,
)
from .oracle import oracle_firing_time
from .periodic import (
    PeriodicOrbit,
    ScanResult,
    ScanRow,
    construct_periodic,
    existence_bound,
    existence_status,
    scan_epsilon,
    verify_fixed_point,
)
from .profile import (
    Params,
    StepProfile,
    Trace,
    ValidationReport,
    compute_traces,
    l1_distance,
    rotate_profile,
    trace_integral,
    validate_profile,
)
from .spectral import (
    CompanionSpec,
    ContractionEstimate,
    Lcg64,
    branch_coeffs,
    companion_matrix,
    empirical_contraction,
    gelfand_radius,
    jsr_ratio_bound,
    matrix_family,
    sample_product_radius,
    spectral_radius,
)
from .weak import (
    DiscontinuityDemo,
    FiringProfile,
    apply_L,
    contraction_constant,
    discontinuity_limit,
    mu_critical,
    solve_T1_neumann,
    verify_cycle_contraction,
)

__version__ = "0.1.0"

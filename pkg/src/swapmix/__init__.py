"""Qubit dynamical maps from partial-swap collisions with randomly polarized ancillas.

The package builds the exact affine Bloch-space channel of a qubit that
repeatedly collides with ancilla qubits whose polarization is drawn from a
distribution on the unit ball, then characterizes the resulting dynamics:
complete positivity (Choi spectra), information backflow (trace-distance
revivals), time-local generators in canonical master-equation form, and
CP/P-divisibility verdicts from the canonical rates.
"""

from .core_maps import (
    AffineQubitMap,
    CollisionParams,
    ContinuousParams,
    SingularMap,
    apply_map,
    as_bloch_vector,
    bloch_from_density,
    continuous_map,
    continuous_map_derivative,
    continuous_map_inverse,
    continuous_params,
    density_from_bloch,
    determinant_tolerance,
    invert_map,
    n_collision_map,
    single_collision_map,
    validate_density,
)
from .diagnostics import (
    ChoiSpectrum,
    DeterminantSeries,
    DivisibilityReport,
    TraceDistanceSeries,
    choi_matrix,
    choi_spectrum,
    choi_spectrum_series,
    cp_check,
    determinant_series,
    divisibility_report,
    pairwise_rate_sums,
    trace_distance,
    trace_distance_series,
)
from .gksl import (
    CanonicalDecomposition,
    GKSLCoefficients,
    IntegrationThroughSingularity,
    canonical_decomposition,
    canonical_rate_series,
    evolve_master_equation,
    generator,
    generator_series,
    gksl_coefficients,
)
from .mixture import (
    BallDistribution,
    EmptySupport,
    GaussianSpec,
    build_gaussian,
    mix,
    mixture_map,
    mixture_map_derivative,
    mixture_map_series,
    point_mass,
    write_distribution_csv,
)
from .runner import (
    ScenarioConfig,
    ScenarioResult,
    builtin_scenarios,
    load_config,
    run_scenario,
    write_outputs,
)

__version__ = "0.1.0"

__all__ = [
    "AffineQubitMap",
    "BallDistribution",
    "CanonicalDecomposition",
    "ChoiSpectrum",
    "CollisionParams",
    "ContinuousParams",
    "DeterminantSeries",
    "DivisibilityReport",
    "EmptySupport",
    "GKSLCoefficients",
    "GaussianSpec",
    "IntegrationThroughSingularity",
    "ScenarioConfig",
    "ScenarioResult",
    "SingularMap",
    "TraceDistanceSeries",
    "apply_map",
    "as_bloch_vector",
    "bloch_from_density",
    "build_gaussian",
    "builtin_scenarios",
    "canonical_decomposition",
    "canonical_rate_series",
    "choi_matrix",
    "choi_spectrum",
    "choi_spectrum_series",
    "continuous_map",
    "continuous_map_derivative",
    "continuous_map_inverse",
    "continuous_params",
    "cp_check",
    "density_from_bloch",
    "determinant_series",
    "determinant_tolerance",
    "divisibility_report",
    "evolve_master_equation",
    "generator",
    "generator_series",
    "gksl_coefficients",
    "invert_map",
    "load_config",
    "mix",
    "mixture_map",
    "mixture_map_derivative",
    "mixture_map_series",
    "n_collision_map",
    "pairwise_rate_sums",
    "point_mass",
    "run_scenario",
    "single_collision_map",
    "trace_distance",
    "trace_distance_series",
    "validate_density",
    "write_distribution_csv",
    "write_outputs",
]

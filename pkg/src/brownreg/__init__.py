"""Gaussian regularization of spectra of non-normal matrices.

The eigenvalues of ``A + sqrt(t) G`` with ``G`` a Gaussian (Ginibre) matrix
approximate the Brown measure of ``A``'s large-size limit.  The package
provides the ensembles, Fuglede-Kadison determinants, log-potential and
Brown-density recovery, the singular-value flow of ``A + M(t)`` and an
experiment pipeline with a command-line front end.
"""

from ._version import __version__
from .brown import (
    BrownDensityGrid,
    BrownOracle,
    EmpiricalMeasure,
    GridSpec,
    LogPotentialField,
    ReferenceMeasure,
    annulus_region,
    brown_density,
    disk_region,
    log_potential,
    log_potential_field,
    measure_distance,
    oracle_brown,
    oracle_potential,
    radial_ks,
    region_mass,
)
from .ensembles import (
    EnsembleSpec,
    brownian_increment,
    nilpotent_shift,
    read_matrix,
    realize,
    sample_elliptic,
    sample_ginibre,
    sample_gue,
    write_matrix,
)
from .estimators import BrownDensityEstimator, RegularizedSpectrum, SingularValueFlow
from .exceptions import (
    BrownRegError,
    ConfigError,
    DecompositionError,
    DomainError,
    FidelityWarning,
    FlowError,
    IngestionError,
    NumericFailure,
    ScheduleError,
    UsageError,
)
from .fkdet import (
    GramVolumes,
    MCEstimate,
    fk_determinant,
    gram_volumes,
    l_moment_oracle,
    mc_fk_gaussian,
    sample_gram_lengths,
    trace_log_abs,
)
from .flow import (
    CoupledResult,
    FlowState,
    FlowTrajectory,
    NoisePath,
    coupled_compare,
    coupled_compare_many,
    drift,
    em_step,
    repulsion_laplacian,
    repulsion_potential,
    replay_flow,
    simulate_flow,
    simulate_flow_endpoints,
    sv_perturbation,
    sv_perturbation_matrix,
)
from .linalg import (
    SpectrumSample,
    StarWord,
    eigenvalues,
    frobenius_moment,
    normalized_trace,
    operator_norm,
    singular_values,
    word_moment,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    Schedule,
    SweepResult,
    emit_report,
    load_report,
    run_regularization,
    schedule_t,
    sweep_t,
)
from .seeding import SeedSpec
from .stats import energy_distance, energy_permutation_test

__all__ = [
    "__version__",
    "BrownDensityEstimator",
    "BrownDensityGrid",
    "BrownOracle",
    "BrownRegError",
    "ConfigError",
    "CoupledResult",
    "DecompositionError",
    "DomainError",
    "EmpiricalMeasure",
    "EnsembleSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "FidelityWarning",
    "FlowError",
    "FlowState",
    "FlowTrajectory",
    "GramVolumes",
    "GridSpec",
    "IngestionError",
    "LogPotentialField",
    "MCEstimate",
    "NoisePath",
    "NumericFailure",
    "ReferenceMeasure",
    "RegularizedSpectrum",
    "Schedule",
    "ScheduleError",
    "SeedSpec",
    "SingularValueFlow",
    "SpectrumSample",
    "StarWord",
    "SweepResult",
    "UsageError",
    "annulus_region",
    "brown_density",
    "brownian_increment",
    "coupled_compare",
    "coupled_compare_many",
    "disk_region",
    "drift",
    "eigenvalues",
    "em_step",
    "emit_report",
    "energy_distance",
    "energy_permutation_test",
    "fk_determinant",
    "frobenius_moment",
    "gram_volumes",
    "l_moment_oracle",
    "load_report",
    "log_potential",
    "log_potential_field",
    "mc_fk_gaussian",
    "measure_distance",
    "nilpotent_shift",
    "normalized_trace",
    "operator_norm",
    "oracle_brown",
    "oracle_potential",
    "radial_ks",
    "read_matrix",
    "realize",
    "region_mass",
    "replay_flow",
    "repulsion_laplacian",
    "repulsion_potential",
    "run_regularization",
    "sample_elliptic",
    "sample_ginibre",
    "sample_gram_lengths",
    "sample_gue",
    "schedule_t",
    "simulate_flow",
    "simulate_flow_endpoints",
    "singular_values",
    "sv_perturbation",
    "sv_perturbation_matrix",
    "sweep_t",
    "trace_log_abs",
    "word_moment",
    "write_matrix",
]

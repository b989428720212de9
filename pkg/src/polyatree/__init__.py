"""Pólya trees with restricted outdegrees: exact counts, singularity
analysis, Boltzmann sampling, and CRT-limit experiments.

The pipeline runs in one direction: parse a degree set, count exactly,
solve the singular system, derive the offspring and forest laws, sample,
and measure.  Each stage is importable on its own; `analysis_bundle`
memoizes the whole solved pipeline for one grammar.
"""

from .errors import (
    AttemptsExhausted,
    InadmissibleSize,
    InconsistentSigma,
    InsufficientTailSamples,
    InvariantViolation,
    PolyaTreeError,
)
from .exact_enum import (
    CanonicalTree,
    CountTable,
    brute_force_enumerate,
    count_coefficients,
)
from .gf_analysis import (
    DerivedConstants,
    ForestLaw,
    OffspringLaw,
    SingularData,
    derived_constants,
    forest_law,
    offspring_law,
    solve_singularity,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    analysis_bundle,
    collect_samples,
    run_benchmark,
    run_height_experiment,
    run_structure_experiment,
    run_tail_experiment,
    run_uniformity_audit,
)
from .metrics_crt import TreeStats, compute_stats, crt_height_moment, crt_height_tail
from .sampler import (
    ColoredTree,
    CounterRng,
    FastSampler,
    check_admissible,
    sample_boltzmann,
    sample_exact,
    sample_window,
)
from .series_core import DegreeSet

__version__ = "0.1.0"

__all__ = [
    "AttemptsExhausted",
    "CanonicalTree",
    "ColoredTree",
    "CountTable",
    "CounterRng",
    "DegreeSet",
    "DerivedConstants",
    "ExperimentConfig",
    "ExperimentReport",
    "FastSampler",
    "ForestLaw",
    "InadmissibleSize",
    "InconsistentSigma",
    "InsufficientTailSamples",
    "InvariantViolation",
    "OffspringLaw",
    "PolyaTreeError",
    "SingularData",
    "TreeStats",
    "analysis_bundle",
    "brute_force_enumerate",
    "check_admissible",
    "collect_samples",
    "compute_stats",
    "count_coefficients",
    "crt_height_moment",
    "crt_height_tail",
    "derived_constants",
    "forest_law",
    "offspring_law",
    "run_benchmark",
    "run_height_experiment",
    "run_structure_experiment",
    "run_tail_experiment",
    "run_uniformity_audit",
    "sample_boltzmann",
    "sample_exact",
    "sample_window",
    "solve_singularity",
    "__version__",
]

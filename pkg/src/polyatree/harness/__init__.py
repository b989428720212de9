"""Experiment driver and command-line interface."""

from .experiments import (
    AnalysisBundle,
    CollectedSamples,
    ExperimentConfig,
    ExperimentReport,
    analysis_bundle,
    collect_samples,
    nearest_admissible,
    run_benchmark,
    run_height_experiment,
    run_structure_experiment,
    run_tail_experiment,
    run_uniformity_audit,
)

__all__ = [
    "AnalysisBundle",
    "CollectedSamples",
    "ExperimentConfig",
    "ExperimentReport",
    "analysis_bundle",
    "collect_samples",
    "nearest_admissible",
    "run_benchmark",
    "run_height_experiment",
    "run_structure_experiment",
    "run_tail_experiment",
    "run_uniformity_audit",
]

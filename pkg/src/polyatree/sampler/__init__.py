"""Colored Boltzmann sampler: reference implementation and fast engine."""

from .core import (
    ColoredTree,
    CycleType,
    ExponentTables,
    SamplerBudget,
    check_admissible,
    sample_boltzmann,
    sample_cycle_type,
    sample_exact,
    sample_window,
)
from .fast import FastSampler, SlotResult
from .rng import (
    DOMAIN_FOREST,
    DOMAIN_REFERENCE,
    DOMAIN_SHAPE,
    DOMAIN_SKELETON,
    CounterRng,
    mix64,
    stream_key,
)
from .tables import AliasTable, JointLaw, build_joint_law

__all__ = [
    "AliasTable",
    "ColoredTree",
    "CounterRng",
    "CycleType",
    "DOMAIN_FOREST",
    "DOMAIN_REFERENCE",
    "DOMAIN_SHAPE",
    "DOMAIN_SKELETON",
    "ExponentTables",
    "FastSampler",
    "JointLaw",
    "SamplerBudget",
    "SlotResult",
    "build_joint_law",
    "check_admissible",
    "mix64",
    "sample_boltzmann",
    "sample_cycle_type",
    "sample_exact",
    "sample_window",
    "stream_key",
]

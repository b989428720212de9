"""Shared fixtures: exact counts and singularity analyses are expensive
enough (seconds per degree set) that the suite computes each one once."""

import pytest

from polyatree.exact_enum import count_coefficients
from polyatree.gf_analysis import (
    derived_constants,
    forest_law,
    offspring_law,
    solve_singularity,
)
from polyatree.series_core import DegreeSet

DEFAULT_N = 400

# the degree-set family exercised throughout the suite
FAMILY = ("0+", "0,2", "0,3", "0,2,3", "0,1,4", "0,3+")

_counts_cache = {}
_analysis_cache = {}


def counts_for(spec: str, N: int = DEFAULT_N):
    key = (spec, N)
    if key not in _counts_cache:
        _counts_cache[key] = count_coefficients(DegreeSet.parse(spec), N)
    return _counts_cache[key]


def analysis_for(spec: str, N: int = DEFAULT_N):
    """(omega, counts, sing, xi, zeta, consts) for one degree set, cached."""
    key = (spec, N)
    if key not in _analysis_cache:
        omega = DegreeSet.parse(spec)
        counts = counts_for(spec, N)
        sing = solve_singularity(omega, counts)
        xi = offspring_law(omega, sing)
        zeta = forest_law(omega, sing)
        consts = derived_constants(omega, sing, xi, zeta)
        _analysis_cache[key] = (omega, counts, sing, xi, zeta, consts)
    return _analysis_cache[key]


@pytest.fixture(scope="session")
def family_analyses():
    return {spec: analysis_for(spec) for spec in FAMILY}

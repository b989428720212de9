"""Exception types shared across the package.

Every error raised by library code derives from :class:`PolyaTreeError`,
so callers can catch one base class at CLI boundaries.
"""


class PolyaTreeError(Exception):
    """Base class for all library errors."""


# --- degree sets -----------------------------------------------------------

class MissingZero(PolyaTreeError):
    """The degree set does not contain 0 (leaves would be impossible)."""


class NoBranchingDegree(PolyaTreeError):
    """The degree set contains no element >= 2, so only paths could form."""


class MalformedTail(PolyaTreeError):
    """Inconsistent explicit entries / infinite-tail threshold."""


# --- series machinery ------------------------------------------------------

class TruncationTooShort(PolyaTreeError):
    """A weight h_k / D_m or a pmf was requested beyond the tabulated range."""


class Divergent(PolyaTreeError):
    """The power-sum tail certifies no convergence for the requested sum."""


# --- enumeration -----------------------------------------------------------

class SizeGuardExceeded(PolyaTreeError):
    """brute_force_enumerate asked for a size beyond its resource guard."""


# --- generating-function analysis ------------------------------------------

class TooCloseToSingularity(PolyaTreeError):
    """Series evaluation cannot certify the requested tolerance at x."""


class NoConvergence(PolyaTreeError):
    """The damped Newton solve did not reach the residual tolerance."""


class BracketFailure(PolyaTreeError):
    """Coefficient-ratio extrapolation failed to bracket the singularity."""


class InconsistentSigma(PolyaTreeError):
    """The two independent sigma^2 routes disagree beyond tolerance."""


class InvariantViolation(PolyaTreeError):
    """A constructed object violates one of its documented invariants."""


# --- sampling --------------------------------------------------------------

class TableMissing(PolyaTreeError):
    """Cycle-type tables were not prepared for the requested exponent."""


class InadmissibleSize(PolyaTreeError):
    """No tree of the requested size exists for this degree set."""


class AttemptsExhausted(PolyaTreeError):
    """Rejection sampling hit the attempt budget before accepting."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


# --- experiments ------------------------------------------------------------

class InsufficientTailSamples(PolyaTreeError):
    """Fewer exceedances than required for a stable tail fit (flag, not fatal)."""

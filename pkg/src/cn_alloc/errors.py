"""Exception hierarchy for the cn_alloc package."""


class CnAllocError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(CnAllocError, ValueError):
    """A parameter violates its documented domain (non-positive intensity, beta > 1, ...)."""


class DegenerateInstanceError(CnAllocError):
    """The sampled geometry cannot produce a valid radio instance (e.g. one
    station with zero noise power, where the interference denominator vanishes)."""


class InfeasibleMarginalsError(CnAllocError):
    """Transport marginals do not carry equal mass and were not balanced."""


class ProvablyInfeasibleError(CnAllocError):
    """The optimization problem has an empty feasible set (e.g. equality supply
    with total demand cap below one)."""


class NonConvergenceError(CnAllocError):
    """Solver exhausted its iteration budget without meeting the requested
    residual tolerance. Carries the best iterate found."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DegenerateProjectionError(CnAllocError):
    """The zero-fixing projection loop emptied its support; the sum-to-one
    constraint cannot be met with the saturation rule exhausted."""


class ConfigError(CnAllocError, ValueError):
    """Configuration document is malformed: unknown key, type mismatch, or
    invariant violation. Message includes the offending key path."""

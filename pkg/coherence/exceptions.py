"""Errors raised by the coherence library.

Every class carries the exit code the management commands report for it.
"""

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_DOMAIN = 4
EXIT_USAGE = 5


class CoherenceError(Exception):
    exit_code = EXIT_DOMAIN


class DimensionError(CoherenceError, ValueError):
    """Non-square input, mismatched dimensions or a dimension above the cap."""
    exit_code = EXIT_USAGE


class NonHermitianError(CoherenceError, ValueError):
    pass


class InvalidStateError(CoherenceError, ValueError):
    """Matrix violates a density-matrix invariant (PSD or unit trace)."""


class IncoherentInputError(CoherenceError):
    pass


class InvalidWitnessError(CoherenceError):
    pass


class NotFinerError(CoherenceError):
    pass


class EmptyDetectionSetError(CoherenceError):
    pass


class InvalidBoundWitnessError(CoherenceError):
    pass


class InvalidChannelError(CoherenceError):
    pass


class ProbabilityError(CoherenceError, ValueError):
    pass


class StatisticsError(CoherenceError):
    pass


class OracleError(CoherenceError):
    pass


class MatrixParseError(CoherenceError, ValueError):
    exit_code = EXIT_PARSE


class NonConvergenceError(CoherenceError):
    """The cutting-plane solver ran out of cuts.

    `lower` and `upper` bracket the robustness value at the point of failure.
    """
    exit_code = EXIT_SOLVER

    def __init__(self, message, lower=None, upper=None, iterations=0):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.iterations = iterations

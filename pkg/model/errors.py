"""
Exception hierarchy for belief-bound.

ModelError and ConfigurationError cover bad input (CLI exit 2, HTTP 400).
AnalysisError covers failures while analysing a valid model (CLI exit 3, HTTP 422).
"""

from typing import Optional


class BeliefBoundError(Exception):
    """Base class for every error raised on purpose by this package."""


class ConfigurationError(BeliefBoundError):
    """Invalid environment variable or option value."""


class ModelError(BeliefBoundError):
    """The model document could not be turned into a valid POMDP."""


class ModelParseError(ModelError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ModelValidationError(ModelError):
    pass


class AnalysisError(BeliefBoundError):
    """A valid model could not be analysed."""


class ActionNotEnabledError(AnalysisError):
    pass


class UndefinedSuccessorError(AnalysisError):
    """Successor requested for an observation reached with probability 0."""


class ObservationMismatchError(AnalysisError):
    pass


class HorizonTooLargeError(AnalysisError):
    pass


class InvalidAbstractionError(AnalysisError):
    pass


class SolverError(AnalysisError):
    pass


class ChainTooLargeError(SolverError):
    pass


class SingularSystemError(SolverError):
    def __init__(self, message: str, states: tuple = ()):
        self.states = states
        super().__init__(message)

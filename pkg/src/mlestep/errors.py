"""Exception types shared across the package."""


class MlestepError(Exception):
    """Base class for errors raised by this package."""


class SimulationDiverged(MlestepError):
    """The simulated state left the finite range.

    Carries the 1-based generation step (burn-in steps included) at which the
    first non-finite state appeared.
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class DegenerateInformationError(MlestepError):
    """An information matrix failed a positivity or conditioning guard.

    The offending matrix is attached so callers can inspect it.
    """

    def __init__(self, message: str, matrix):
        super().__init__(message)
        self.matrix = matrix


class EstimationError(MlestepError):
    """A preliminary estimator could not produce a usable value."""


class StudyError(MlestepError):
    """Too many replications of a Monte Carlo study failed."""

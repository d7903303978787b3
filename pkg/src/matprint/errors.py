"""Exception hierarchy and process exit codes shared across the package."""


class MatprintError(Exception):
    """Base class for all matprint errors."""


class InvalidInputError(MatprintError, ValueError):
    """Raised when an argument violates an operation's preconditions."""


class NotFoundError(MatprintError, LookupError):
    """Raised when a referenced material or resource does not exist."""


class FormatError(MatprintError, ValueError):
    """Raised when a file does not conform to its on-disk format."""


class DependencyUnavailableError(MatprintError, RuntimeError):
    """Raised when an optional runtime dependency (model, extractor) is missing."""


class TrainingDivergedError(MatprintError, RuntimeError):
    """Raised when optimization produces a non-finite loss."""


class DegenerateDataWarning(UserWarning):
    """Emitted for degenerate inputs handled by a documented convention
    (constant rating groups, constant attribute columns, frame collisions)."""


# CLI / service exit-code contract.
EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_MISSING_DEPENDENCY = 3
EXIT_FORMAT = 4

"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI reports for it.
"""


class LamlenError(Exception):
    """Base class for all lamlen errors"""

    exit_code = 1


class InvalidInputError(LamlenError, ValueError):
    """Degenerate geometric input (coincident vertices, overlapping boxes, ...)"""

    exit_code = 6


class DomainError(LamlenError, ValueError):
    """Argument outside the domain of a function"""

    exit_code = 5


class DivergenceError(DomainError):
    """Series evaluated at a point where it diverges"""


class NotHyperbolicError(InvalidInputError):
    """Integer matrix whose trace has absolute value at most 2"""

    exit_code = 7


class DegenerateStartError(InvalidInputError):
    """Geodesic is an edge of the Farey tessellation"""

    exit_code = 8


class InvalidConfigError(LamlenError):
    """Experiment configuration or preset is not usable"""

    exit_code = 3


class OutputError(LamlenError):
    """Output directory or file cannot be written"""

    exit_code = 4


class QuadratureWarning(RuntimeWarning):
    """Adaptive quadrature stopped before reaching the requested tolerance"""


# Exit status for a run whose statistical criteria failed.
STATISTICAL_FAILURE_EXIT = 2

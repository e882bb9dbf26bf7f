"""Exception hierarchy.

Every failure mode maps to one CLI exit code (see ``cli.EXIT_CODES``).
"""


class SegreLinesError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidInput(SegreLinesError):
    exit_code = 1


class NumericFailure(SegreLinesError):
    exit_code = 4


class Unsupported(SegreLinesError):
    exit_code = 1


class SingularAlongLine(SegreLinesError):
    """The components p_i share a root: X is singular at a point of the line."""

    exit_code = 2


class Degenerate(SegreLinesError):
    """det A_C = 0; the normal bundle is not balanced."""

    exit_code = 2


class NotBalanced(Degenerate):
    pass


class DegenerateOnWall(SegreLinesError):
    exit_code = 2


class NonGenericCurve(SegreLinesError):
    exit_code = 2


class NonGenericPath(SegreLinesError):
    exit_code = 2


class InvalidSecant(SegreLinesError):
    exit_code = 2


class DegenerateConfig(SegreLinesError):
    exit_code = 2


class SupplyPointRequired(SegreLinesError):
    """No rational point of the conic was found; pass one explicitly."""

    exit_code = 1


class IncompleteEnumeration(SegreLinesError):
    """Raised when a multistart search fails its completeness certificate.

    The partial report (if any) is attached as ``report``.
    """

    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

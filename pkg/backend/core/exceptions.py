"""Exception hierarchy shared by the services, the CLI and the API.

Every error carries the process exit code the CLI reports for it.
"""


class LabError(Exception):
    """Base class for all lab errors."""

    exit_code = 2


class ConfigInvalid(LabError, ValueError):
    """Scenario configuration could not be parsed or validated."""

    exit_code = 1


class NumericFailure(LabError):
    """A numerical routine could not produce a trustworthy result."""

    exit_code = 2


class NonHermitianInput(NumericFailure, ValueError):
    pass


class NegativeEigenvalue(NumericFailure, ValueError):
    pass


class InvalidDensityMatrix(NumericFailure, ValueError):
    pass


class NotXState(NumericFailure, ValueError):
    pass


class NonPositiveLength(NumericFailure, ValueError):
    pass


class NegativeRate(NumericFailure, ValueError):
    pass


class SingularParameter(NumericFailure, ValueError):
    pass


class StepSizeUnstable(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class NoNullVector(NumericFailure):
    pass


class OracleDiscrepancy(LabError):
    """Two independent computations of the same quantity disagree beyond threshold."""

    exit_code = 3

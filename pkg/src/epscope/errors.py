"""Exception hierarchy shared by all epscope modules."""


class EpscopeError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(EpscopeError, ValueError):
    """Invalid input: wrong dimensions, non-finite entries, bad options."""


class NumericalError(EpscopeError, ArithmeticError):
    """A numerical procedure failed to meet its accuracy contract."""


class DegeneratePencilError(NumericalError):
    """The discriminant polynomial lost its leading degree (repeated slopes)."""


class ConditioningError(NumericalError):
    """Interpolated coefficients do not reproduce the sampled discriminant."""


class RefinementError(NumericalError):
    def __init__(self, message, lambda_last=None, energy_last=None, residual=None):
        super().__init__(message)
        self.lambda_last = lambda_last
        self.energy_last = energy_last
        self.residual = residual


class PathTooCloseError(NumericalError):
    """Adaptive subdivision could not resolve branch matching on a segment."""

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class ConfigurationError(EpscopeError):
    """Scan or loop geometry is incompatible with the located EPs."""


class NotDefectiveError(NumericalError):
    """The matrix at the supposed EP is not a rank-one-defect Jordan case."""


class ReferenceMismatchError(NumericalError):
    """The chirality reference pair does not describe the EP eigenvector."""


class StatisticsError(EpscopeError):
    """Too few or degenerate samples for a fit or a test statistic."""

"""Exception hierarchy shared by every module of the package."""


class EntmonoError(ValueError):
    """Base class for all errors raised by entmono."""


class DimensionMismatchError(EntmonoError):
    pass


class NotHermitianError(EntmonoError):
    pass


class NotPSDError(EntmonoError):
    pass


class NotNormalizedError(EntmonoError):
    pass


class TraceNotOneError(EntmonoError):
    pass


class StateKindError(EntmonoError):
    """Raised when a pure state was required and a mixed one given (or vice versa)."""


class ConvergenceError(EntmonoError):
    pass


class ProbabilityError(EntmonoError):
    pass

"""Exception types shared across the package.

Each class name matches the error label used in reports and CLI messages.
"""


class GammaDynError(Exception):
    """Base class; ``label`` is the stable name written into reports."""

    @property
    def label(self) -> str:
        return type(self).__name__


class PreconditionViolated(GammaDynError, ValueError):
    pass


class EmptySupport(GammaDynError, ValueError):
    pass


class BlockOutOfRange(GammaDynError, IndexError):
    pass


class AllZero(GammaDynError, ValueError):
    pass


class ExtractionFailed(GammaDynError):
    pass


class RejectionBudgetExceeded(GammaDynError):
    pass


class NoTrend(ExtractionFailed):
    pass


class SingularBasis(GammaDynError, ValueError):
    pass


class CoordinateExhausted(GammaDynError):
    pass


class MBudgetExceeded(GammaDynError):
    pass


class PrecisionExhausted(MBudgetExceeded):
    """A shift power would push a coefficient outside the normal double range."""


class PhaseBudgetExceeded(GammaDynError):
    pass


class Coverable(GammaDynError):
    pass


class ReportFailure(GammaDynError):
    pass


class BoundViolated(GammaDynError):
    pass


class TargetUnreachable(GammaDynError, ValueError):
    pass


class NotASymmetry(GammaDynError, ValueError):
    pass

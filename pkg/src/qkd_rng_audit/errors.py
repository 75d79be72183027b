"""Exception hierarchy shared by every module."""


class AuditError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDistributionError(AuditError, ValueError):
    """A probability vector has negative entries or does not sum to one."""


class ShapeError(AuditError, ValueError):
    """Arrays or bit strings of incompatible length."""


class DomainError(AuditError, ValueError):
    """An argument lies outside the domain of the function."""


class CapacityError(AuditError):
    """A requested exhaustive expansion exceeds the configured cap."""


class SaturationError(AuditError):
    """The Holevo budget is too large for a finite ratio envelope to exist."""


class BudgetExhaustedError(AuditError):
    """A party tried to read more random bits than its string holds."""


class InconsistentPosteriorError(AuditError, ValueError):
    """A key posterior falls outside the regime the security bound covers."""

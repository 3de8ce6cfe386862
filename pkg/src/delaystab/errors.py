"""Exception hierarchy shared by all delaystab modules."""


class DelayStabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DelayStabError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ExtrapolationError(DomainError):
    """A tabulated function was evaluated outside its knot range."""


class PreconditionError(DelayStabError, ValueError):
    """Sampled data violates a hypothesis of the operation (e.g. a(t) <= 0)."""


class BlowUpError(DelayStabError, ArithmeticError):
    """The numerical state became non-finite."""

    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"solution became non-finite at t={t:.6g}")


class InsufficientDataError(DelayStabError, ValueError):
    """Too few usable samples for a statistical diagnostic."""


class SchemaError(DelayStabError, ValueError):
    """A problem description does not match the JSON schema."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)

"""Exception hierarchy shared by every congrkit module."""


class CongrkitError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(CongrkitError, ValueError):
    pass


class NotUnimodularError(CongrkitError, ValueError):
    pass


class InvalidWordError(CongrkitError, ValueError):
    pass


class InvalidPositionsError(CongrkitError, ValueError):
    pass


class ZeroEntryError(CongrkitError, ValueError):
    pass


class NotCoprimeError(CongrkitError, ValueError):
    pass


class WrongLevelError(CongrkitError, ValueError):
    pass


class InternalInvariantError(CongrkitError, AssertionError):
    """Raised when an internal identity fails; always a logic bug."""


class CapExceededError(CongrkitError):
    def __init__(self, message, partial_size=None):
        super().__init__(message)
        self.partial_size = partial_size


class NotGeneratingError(CongrkitError, ValueError):
    pass


class ToleranceError(CongrkitError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ParseError(CongrkitError, ValueError):
    pass

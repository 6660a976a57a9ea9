"""Exception hierarchy shared by all modules."""


class IcnashError(Exception):
    """Base class for every error raised by this package."""


class LengthMismatch(IcnashError, ValueError):
    pass


class NegativeValue(IcnashError, ValueError):
    pass


class ProbSumInvalid(IcnashError, ValueError):
    pass


class SizeOverflow(IcnashError, ValueError):
    """Enumerated state space would exceed the configured cap."""


class IndexOutOfRange(IcnashError, IndexError):
    pass


class VisibilityMismatch(IcnashError, ValueError):
    """A policy or profile is indexed by the wrong kind of state space."""


class ZeroDirectGain(IcnashError, ValueError):
    pass


class DimensionMismatch(IcnashError, ValueError):
    pass


class NonConvergence(IcnashError, RuntimeError):
    pass


class ConfigInvalid(IcnashError, ValueError):
    pass


class ParseError(IcnashError, ValueError):
    """Malformed or unrecognised configuration input.

    ``line`` and ``column`` are 1-based and may be ``None`` when the
    location is not known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class IoError(IcnashError, OSError):
    pass


class RestartLimitExceeded(RuntimeWarning):
    """Emitted when the two-phase solver gives up after ``max_restarts``."""

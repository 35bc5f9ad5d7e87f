"""Exception hierarchy shared by every module of the package."""


class SeqracError(Exception):
    """Base class for all errors raised by seqrac."""


class NotHermitian(SeqracError, ValueError):
    pass


class NotPsd(SeqracError, ValueError):
    pass


class NoConvergence(SeqracError, RuntimeError):
    """An iterative routine hit its iteration cap.

    ``result`` carries whatever partial output the routine produced, if any.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BadDimension(SeqracError, ValueError):
    pass


class DimensionMismatch(SeqracError, ValueError):
    pass


class InvalidObject(SeqracError, ValueError):
    """A state, POVM or instrument violates its defining constraints."""


class BadSharpness(SeqracError, ValueError):
    pass


class BadVisibility(SeqracError, ValueError):
    pass


class OutOfRange(SeqracError, ValueError):
    pass


class RegressionMismatch(SeqracError, AssertionError):
    """Computed report values drifted from the frozen reference table."""

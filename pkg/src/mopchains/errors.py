"""Exception hierarchy.

Every error raised on purpose by the package derives from ``MopError`` and
carries an ``exit_code`` used by the command-line front end.
"""


class MopError(Exception):
    exit_code = 1


class DomainError(MopError, ValueError):
    """Parameters or arguments outside the admissible set."""

    exit_code = 3


class NumericError(MopError, ArithmeticError):
    """A numerical routine did not reach the requested accuracy."""

    exit_code = 4

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularMinorError(NumericError):
    def __init__(self, index):
        super().__init__(f"leading principal minor of order {index + 1} vanishes")
        self.index = index


class StructureError(MopError):
    """An operator does not have the expected band structure."""

    exit_code = 5


class ConsistencyError(MopError):
    """Two quantities that must agree do not (e.g. a row sum differs from 1)."""

    exit_code = 5


class PositivityError(ConsistencyError):
    pass


class SizingError(MopError):
    """A truncation is too small to hold the requested query exactly."""

    exit_code = 6

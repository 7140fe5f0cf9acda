"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to.
"""


class H2wError(Exception):
    """Base class for all h2wkit errors."""

    exit_code = 6


class ModelParseError(H2wError, ValueError):
    """Malformed model document. ``line`` is 1-based when known."""

    exit_code = 2

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class DimensionMismatchError(ModelParseError):
    pass


class BandViolationError(H2wError, ValueError):
    """The frequency bound reaches a purely imaginary pole."""

    exit_code = 3

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


class DegenerateSpectrumError(H2wError, ValueError):
    """Repeated or near-defective eigenvalues."""

    exit_code = 4


class BackendDisagreementError(H2wError):
    exit_code = 5


class SolverError(H2wError, ArithmeticError):
    """A numerical solve failed its accuracy check."""

    exit_code = 6


class SingularShiftError(SolverError):
    """``sI - A`` is numerically singular at the requested shift."""


class SingularPencilError(SolverError):
    """Lyapunov operator is singular (some ``l_i + l_k ~ 0``)."""


class NonConvergenceError(SolverError):
    pass


class RealificationError(SolverError):
    """Imaginary residue of a real quantity exceeded tolerance."""


class PreconditionError(H2wError, ValueError):
    """Model does not satisfy a backend's preconditions (D = 0, stability)."""

    exit_code = 6


class NonzeroFeedthroughError(PreconditionError):
    pass


class UnstableModelError(PreconditionError):
    pass

"""Exception types raised across the package."""


class StabRegError(Exception):
    """Base class for all package errors."""


class InvalidDimension(StabRegError, ValueError):
    """A size argument violates a generator or operator precondition."""


class InvalidParameter(StabRegError, ValueError):
    """A scalar parameter is outside its admissible range."""


class NonConvergence(StabRegError, ArithmeticError):
    """The iterative SVD failed to converge."""


class SingularToWorkingPrecision(StabRegError, ArithmeticError):
    """A direct factorization met a pivot that is zero to working precision."""


class DegenerateReference(StabRegError, ValueError):
    """A relative error was requested against a zero reference norm."""

"""Exception types shared by all modules."""


class IrqftError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(IrqftError, ValueError):
    """Operands live in spaces of different dimension."""


class MalformedConeError(IrqftError, ValueError):
    """A cone description is empty, unbounded or otherwise invalid."""


class UnsupportedRepresentationError(IrqftError, ValueError):
    """The requested operation needs a representation the input lacks."""


class InvalidInputError(IrqftError, ValueError):
    """A documented precondition of an operation does not hold."""


class NumericalFailure(IrqftError, ArithmeticError):
    """A quadrature, contour integral or optimization failed to converge."""


class TubeViolation(InvalidInputError):
    """A point that must lie in a tube domain does not."""


class TruncationInsufficient(IrqftError, ArithmeticError):
    """A rigorous tail bound is not finite at the requested point."""


class HypothesisViolation(InvalidInputError):
    """An input violates a structural hypothesis (e.g. cone contains a line)."""

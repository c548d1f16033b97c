"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A numeric parameter violates a required ordering or range."""


class PreconditionError(ValueError):
    """Input data violates an operation's precondition."""


class EmptyReductionError(PreconditionError):
    """Removing the requested indices would leave an empty sequence."""


class NotContractingError(ArithmeticError):
    """A supremum over all iterates is infinite for the requested rate."""

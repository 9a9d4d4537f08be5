"""Exception types raised by the solver."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PreconditionError(ValueError):
    """An input violates a documented precondition (e.g. an unnormalized field)."""


class NumericalError(ArithmeticError):
    """A linear solve broke down or failed to converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

"""Exception types raised across the package."""


class MlsieError(Exception):
    """Base class for all package errors."""


class InvalidArgument(MlsieError, ValueError):
    pass


class NumericalFailure(MlsieError, ArithmeticError):
    pass


class SingularMatrixError(NumericalFailure):
    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix is singular (pivot {pivot_index})")


class NotPositiveDefiniteError(NumericalFailure):
    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix is not positive definite (pivot {pivot_index})")


class RankDeficientError(NumericalFailure):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"matrix is rank deficient (column {column})")


class NoCoverageError(NumericalFailure):
    """No trial point lies within the support radius of the evaluation point."""

    def __init__(self, x, delta):
        self.x = x
        self.delta = delta
        super().__init__(f"no trial point within delta={delta:g} of x={list(x)}")


class NonUnisolventError(NumericalFailure):
    """The local point set cannot determine a polynomial of the requested degree."""

    def __init__(self, x, indices, delta):
        self.x = x
        self.indices = list(indices)
        self.delta = delta
        super().__init__(
            f"local point set at x={list(x)} (delta={delta:g}, #J={len(self.indices)}) "
            f"is not unisolvent: J={self.indices}"
        )


class SolvabilityError(NumericalFailure):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class ProjectionUndefinedError(NumericalFailure):
    pass


class ExprError(MlsieError):
    pass


class ExprSyntaxError(ExprError, ValueError):
    def __init__(self, offset, message, text=""):
        self.offset = offset
        self.text = text
        super().__init__(f"syntax error at offset {offset}: {message}")


class UnknownIdentifierError(ExprError, ValueError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class ExprEvalError(ExprError, ArithmeticError):
    pass


class UnboundVariableError(ExprEvalError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class DomainError(ExprEvalError):
    pass

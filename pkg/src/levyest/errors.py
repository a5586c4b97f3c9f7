"""Exception types raised by the estimation pipeline."""


class LevyEstError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(LevyEstError, ValueError):
    pass


class EmptyAdmissibleError(LevyEstError):
    """No model in the collection satisfies D_m <= T."""


class InsufficientDataError(LevyEstError):
    pass


class DegenerateGridError(LevyEstError):
    pass


class InvalidDataError(LevyEstError, ValueError):
    """Data incompatible with the model (e.g. non-positive Gamma increments)."""


class DegenerateDataError(LevyEstError):
    pass


class NumericFailureError(LevyEstError, ArithmeticError):
    """Quadrature or root finding failed to reach the requested tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

"""Exception hierarchy shared by all modules."""


class PoincareError(Exception):
    """Base class for every error raised by the package."""


class DegenerateCurve(PoincareError):
    pass


class NotElliptic(PoincareError):
    pass


class DimensionMismatch(PoincareError, ValueError):
    pass


class InvalidOrder(PoincareError, ValueError):
    pass


class TooCloseToBoundary(PoincareError):
    pass


class StencilCrossesBoundary(PoincareError):
    pass


class MomentViolation(PoincareError):
    pass


class NotNormal(PoincareError):
    """Symbol determinant vanishes somewhere on the curve."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class PhaseResolutionExceeded(PoincareError):
    pass


class SolvabilityViolated(PoincareError):
    """A necessary moment condition on the boundary data fails.

    ``condition`` is a short identifier of the violated condition and
    ``residual`` the offending moment.
    """

    def __init__(self, condition, residual, message=None):
        self.condition = condition
        self.residual = residual
        super().__init__(message or f"{condition} violated: moment = {residual:.4f}")


class Unsolvable(PoincareError):
    """Adjoint orthogonality conditions are not met by the right-hand side."""

    def __init__(self, message, residuals=None, diagnostics=None):
        super().__init__(message)
        self.residuals = [] if residuals is None else list(residuals)
        self.diagnostics = diagnostics

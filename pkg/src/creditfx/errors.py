"""Exception types shared across the package."""


class CreditFxError(Exception):
    """Base class for package-specific failures."""


class UnsupportedRegimeError(CreditFxError, ValueError):
    """Parameters fall outside every closed-form regime; use the numeric solver."""


class BlowUpError(CreditFxError, ArithmeticError):
    """The Riccati state escaped to +/-1e12 or became non-finite during integration."""

    def __init__(self, escape_time: float):
        self.escape_time = escape_time
        super().__init__(f"Riccati state blew up near t={escape_time:.6g}")


class ConvergenceError(CreditFxError, ArithmeticError):
    """An iterative procedure (ODE step control, limit extrapolation) did not converge."""


class CurveRangeError(CreditFxError, ValueError):
    """A curve was queried below its first tenor or curves cover disjoint ranges."""


class CalibrationError(CreditFxError, RuntimeError):
    """A bootstrap or fit could not produce a valid result."""

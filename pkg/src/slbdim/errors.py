"""Exception types raised across the solver pipeline."""


class SlbdimError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SlbdimError, ValueError):
    """An argument is outside its admissible range."""


class InvalidDomainError(SlbdimError, ValueError):
    """Degenerate or inconsistent domain description."""


class SingularityError(SlbdimError, ArithmeticError):
    """Kernel evaluated at its singular point."""


class OutOfSubdomainError(SlbdimError, ValueError):
    """Point lies outside the integration subdomain."""


class RankDeficiencyError(SlbdimError, ArithmeticError):
    """Interpolation nodes do not span the requested basis (e.g. duplicates)."""


class IllConditionedStencilError(SlbdimError, ArithmeticError):
    """Direct interpolation matrix too ill-conditioned to solve reliably.

    Carries the condition-number estimate that triggered the failure.
    """

    def __init__(self, kappa: float, message: str = ""):
        self.kappa = kappa
        super().__init__(message or f"local interpolation matrix condition {kappa:.3e} "
                                    f"exceeds working-precision limit")


class UnstableFactorizationError(SlbdimError, ArithmeticError):
    """Stable basis change lost rank after truncation."""


class NumericFailureError(SlbdimError, ArithmeticError):
    """Non-finite values encountered mid-computation; carries stencil context."""

    def __init__(self, message: str, stencil_id=None):
        self.stencil_id = stencil_id
        super().__init__(message)


class AssemblyError(SlbdimError, ValueError):
    """Local operator refers to an unknown node id."""


class SingularSystemError(SlbdimError, ArithmeticError):
    """Global system is singular in the direct fallback."""


class UndefinedMetricError(SlbdimError, ZeroDivisionError):
    """Relative error metric undefined (zero reference norm)."""

"""Exception types shared across the package."""


class RelentError(Exception):
    """Base class for all package-specific errors."""


class NotHermitianError(RelentError):
    """Raised when a matrix deviates from its conjugate transpose.

    Carries the maximum entrywise asymmetry in ``max_asymmetry``.
    """

    def __init__(self, max_asymmetry):
        self.max_asymmetry = float(max_asymmetry)
        super().__init__(
            f"matrix is not Hermitian: max |A - A^dag| entry = {self.max_asymmetry:.3e}"
        )


class NotPSDError(RelentError):
    """Raised when an operator required to be positive semi-definite is not."""


class SupportMismatchError(RelentError):
    """Raised when an operator leaks outside the support of a reference operator."""


class DimensionError(RelentError):
    """Raised on inconsistent tensor-factor dimensions or invalid subsystem indices."""


class LeakageError(RelentError):
    """Raised when a truncated Fock representation carries too much high-level mass."""


class InfeasibleStartError(RelentError):
    """Raised when no attempted solver initialization has a finite objective."""


class ProjectionError(RelentError):
    """Raised when an alternating-projection routine fails to converge.

    Carries the final residual in ``residual``.
    """

    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(message or f"projection did not converge: residual = {self.residual:.3e}")


class StateFileError(RelentError):
    """Raised on malformed state files (schema or encoding problems)."""

"""Exception hierarchy shared across the package."""


class SteercertError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(SteercertError):
    """Matrix or operator dimensions do not match."""


class ValidationError(SteercertError):
    """Input violates a structural precondition (orthonormality, POVM laws, ...)."""


class NotPsdError(SteercertError):
    """An operator that must be positive semidefinite is not.

    Carries the offending smallest eigenvalue in ``min_eigenvalue``.
    """

    def __init__(self, message, min_eigenvalue):
        super().__init__(message)
        self.min_eigenvalue = float(min_eigenvalue)


class DomainError(SteercertError):
    """Scalar argument outside its mathematically valid range."""


class CapabilityError(SteercertError):
    """Requested construction is not known to exist (e.g. >3 MUBs in d=6)."""


class CapacityError(SteercertError):
    """Problem size exceeds the deterministic-strategy enumeration cap."""


class SolverFailure(SteercertError):
    """Numerical routine or conic solver failed; carries diagnostics."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InternalConsistencyError(SteercertError):
    """An algebraic identity the construction relies on failed numerically."""

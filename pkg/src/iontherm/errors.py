"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
resource (memory budget) problems with 3, numerical failures with 4.
"""


class IonThermError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(IonThermError):
    """A run configuration is malformed or inconsistent."""


class BudgetExceededError(IonThermError):
    """A dense matrix would exceed the configured memory budget."""

    def __init__(self, message, required_bytes, budget_bytes):
        super().__init__(message)
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes


class SolverFailureError(IonThermError):
    """An iterative solver did not converge; carries the final residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class EigensolverError(IonThermError):
    """The dense eigensolver failed; carries size diagnostics."""

    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size


class EmptyShellError(IonThermError):
    """All microcanonical weights underflowed to zero."""


class NumericalConsistencyError(IonThermError):
    """An internal numerical identity was violated beyond tolerance."""

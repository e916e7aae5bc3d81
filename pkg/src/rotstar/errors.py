"""Exception taxonomy shared across the solver stack."""


class RotstarError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RotstarError):
    """Invalid or inconsistent run configuration."""


class DomainError(RotstarError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SeriesDomainError(DomainError):
    """Expansion variable left the configured convergence region."""


class ConvergenceError(RotstarError):
    """An iteration failed to reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class RegimeError(RotstarError):
    """Parameter regime assumption (small rotation / weak field) violated."""


class ErgoViolationError(RegimeError):
    """The 4-velocity normalization quantity lost positivity somewhere."""


class DecayError(RotstarError):
    """Field decays too slowly for its declared index."""


class SolverError(RotstarError):
    """Linear-algebra stage failed (near-singular system etc.)."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class AsymptoticsError(RotstarError):
    """Far-field extrapolation did not stabilize."""

"""Exception hierarchy shared by all modules."""


class NsdaubError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NsdaubError, ValueError):
    """Evaluation outside the domain of a Laurent polynomial (z = 0)."""


class RootFindingError(NsdaubError):
    """Root extraction failed; ``partial`` holds whatever was recovered."""

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = tuple(partial)


class PairingError(NsdaubError):
    """Roots that should pair under z -> 1/z could not be matched."""


class ConjugateClosureError(NsdaubError, ValueError):
    """A root list is not closed under complex conjugation."""


class ConditioningError(NsdaubError):
    """A linear system is too ill-conditioned to trust its solution."""


class FactorizationError(NsdaubError):
    """Deflating the known linear factors out of a symbol left a residual."""


class SelectionError(NsdaubError):
    """Spectral root selection was ambiguous."""


class TrackingError(NsdaubError):
    """A tracked filter was requested at a level below k_0."""

    def __init__(self, message, k0=None):
        super().__init__(message)
        self.k0 = k0


class GridMismatchError(NsdaubError, ValueError):
    """Two dyadic tabulations live on different grids."""

"""Exception types raised across the package."""


class QDistillError(Exception):
    """Base class for all package errors."""


class InvalidState(QDistillError, ValueError):
    """A matrix failed one of the density-matrix invariants."""


class NotHermitian(InvalidState):
    pass


class NotPSD(InvalidState):
    pass


class DomainError(QDistillError, ValueError):
    pass


class ZeroVector(QDistillError, ValueError):
    pass


class DependentVectors(QDistillError, ValueError):
    pass


class InternalInconsistency(QDistillError, RuntimeError):
    """Two independent checks disagree about a state's structure."""


class NotEntangled(QDistillError, ValueError):
    pass


class ZeroProbability(QDistillError, ValueError):
    """The filter annihilates the support of the state."""


class NoProductKernel(QDistillError, ValueError):
    pass


class WrongClass(QDistillError, ValueError):
    """A protocol was requested for a state outside its class.

    The actual class tag is kept on ``actual``.
    """

    def __init__(self, message, actual=None):
        super().__init__(message)
        self.actual = actual


class NoConvergence(QDistillError, RuntimeError):
    """Iteration limit reached; ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RecipeUnsatisfiable(QDistillError, RuntimeError):
    pass

"""Exception hierarchy shared by all modules."""


class Spin7Error(Exception):
    """Base class for every error raised by the package."""


class ContractViolation(Spin7Error, ValueError):
    """An input breaks the documented precondition of an operation."""


class NumericalError(Spin7Error, ArithmeticError):
    """Non-finite samples or a similar floating point breakdown."""


class FactorizationError(Spin7Error, ArithmeticError):
    """A matrix that should be symmetric positive-definite is not."""


class SingularGramError(FactorizationError):
    """The torus generators are linearly dependent at the point."""


class NotLocallyFreeError(Spin7Error):
    """The multi-moment one-form vanishes, so the torus does not act locally freely."""


class WeakCoherenceError(FactorizationError):
    """The symplectic triple does not span a maximal positive subspace."""


class CosymplecticViolation(ContractViolation):
    """The curvature condition QA = A^T Q fails."""


class IntervalBoundaryError(Spin7Error):
    """det(1 + tA) vanishes: t is outside the maximal existence interval."""


class FlowDegenerateError(Spin7Error):
    """Q lost positive-definiteness or the volume factor hit zero."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t

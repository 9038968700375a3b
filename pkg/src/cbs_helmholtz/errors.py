"""Exception types raised by the solver stack."""


class CBSError(Exception):
    """Base class for all package errors."""


class InvalidModelError(CBSError, ValueError):
    """A medium or grid description violates its invariants."""


class InvalidABLError(InvalidModelError):
    """Absorbing boundary layer parameters are inconsistent."""


class DegenerateModelError(InvalidModelError):
    """The contrast vanishes everywhere, so no positive damping can be chosen."""


class InvalidParameterError(CBSError, ValueError):
    """A numerical parameter is outside its admissible range."""


class ShapeError(CBSError, ValueError):
    """Array dimensions do not match the grid they are defined on."""


class SingularityError(CBSError, ValueError):
    """Evaluation requested at the singular point of a kernel."""


class PreconditionError(CBSError, ValueError):
    """Input operator lacks a structural property the routine relies on."""


class UndefinedReferenceError(CBSError, ValueError):
    """A reference field has zero norm over the comparison mask."""


class NumericalBlowupError(CBSError, FloatingPointError):
    """An iterate contains NaN or Inf values."""


class SolverError(CBSError, RuntimeError):
    """Sparse factorization failed or did not reach the residual bound.

    Attributes
    ----------
    condition_estimate : float or None
        1-norm condition number estimate of the system matrix, if available.
    """

    def __init__(self, msg, condition_estimate=None):
        super().__init__(msg)
        self.condition_estimate = condition_estimate


class AdmissibilityWarning(UserWarning):
    """Damping is below the contrast bound; convergence is not guaranteed."""

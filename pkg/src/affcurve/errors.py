"""Exception hierarchy shared by every module of the package."""


class AffcurveError(Exception):
    """Base class for all package errors."""


class InputError(AffcurveError, ValueError):
    """Malformed or out-of-contract input."""


class DomainError(InputError):
    """A parameter lies outside the (open) domain of a curve."""


class UnsupportedOrderError(InputError):
    """Derivative order above the curve dimension was requested."""


class OrderError(InputError):
    """A parameter tuple is unordered or contains ties."""


class ArityError(InputError):
    """Wrong number of parameters for an X-ray map."""


class RangeError(InputError):
    """Argument outside the range of a tabulated function."""


class SingularTorsionError(AffcurveError):
    """Some lower-dimensional torsion vanishes where it must not.

    Attributes
    ----------
    j : int
        Index of the vanishing torsion ``L^j``.
    t : float or None
        Approximate location of the zero or sign change.
    """

    def __init__(self, j, t=None, message=None):
        self.j = j
        self.t = t
        if message is None:
            where = "" if t is None else f" near t={t:.17g}"
            message = f"torsion L^{j} vanishes{where}"
        super().__init__(message)


class ZeroTorsionError(SingularTorsionError):
    """The top torsion vanishes at a sample, so a ratio is undefined."""


class AccuracyError(AffcurveError):
    """A numerical procedure failed to reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best value obtained before giving up.
    error : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        self.estimate = estimate
        self.error = error
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")


class DegenerateHullError(AffcurveError):
    """Convex hull of the samples has (numerically) zero volume."""


class DegenerateCurveError(AffcurveError):
    """The torsion vanishes identically."""


class ComplexityError(AffcurveError):
    """A decomposition produced more pieces than allowed."""


class ResolutionError(AffcurveError):
    """A box covering would exceed the allowed number of boxes."""

"""Exception types shared across the package."""


class StableSupError(Exception):
    """Base class for all errors raised by this package."""


class RegimeError(StableSupError):
    """The requested method or quantity is unavailable in this parameter regime."""


class ContourError(StableSupError):
    """A contour or evaluation point violates a geometric precondition."""


class BranchCutError(ContourError):
    """A principal-branch logarithm would have to cross its cut."""


class PlanError(StableSupError):
    """Quadrature planning failed: no usable decay or an inconsistent budget."""


class ToleranceError(StableSupError):
    """The achieved error estimate exceeds the requested tolerance."""

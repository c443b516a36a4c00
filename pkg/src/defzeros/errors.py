"""Exception types raised across the package."""


class DefZerosError(Exception):
    """Base class of every error raised on purpose by this package."""


class InvalidArgument(DefZerosError, ValueError):
    pass


class DegenerateInput(DefZerosError, ValueError):
    """A curve or surface that is not immersed, not closed, or otherwise unusable."""


class ChartOverflow(DefZerosError, ValueError):
    """A rotated hypersurface cannot be represented in any single affine chart."""


class RefinementFailure(DefZerosError, RuntimeError):
    """Root refinement did not drive the residual below tolerance."""


class ConstructionFailure(DefZerosError, RuntimeError):
    """The pathological-curve construction could not satisfy its invariants."""


class ResolutionFailure(DefZerosError, RuntimeError):
    """Too many Monte Carlo trials were unstable under grid doubling."""

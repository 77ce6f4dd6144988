"""Exception hierarchy.

Every failure mode raised by this package derives from :class:`AdiabandError`
so callers can catch one type at the boundary.  The leaf types are deliberately
fine grained: the experiment harness reports them per sweep point, and the
test suite asserts on the exact type.
"""


class AdiabandError(Exception):
    """Base class for all errors raised by adiaband."""


class NonHermitianInput(AdiabandError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class ConvergenceFailure(AdiabandError):
    """An iterative numerical routine (eigensolver, quadrature) did not converge."""


class DimensionMismatch(AdiabandError):
    """Operands have incompatible shapes."""


class DimensionTooLarge(AdiabandError):
    """Requested problem size exceeds the supported dense-matrix range."""


class EmptyBand(AdiabandError):
    """A band selection matched no eigenvalue cluster."""


class GapCollapse(AdiabandError):
    """The spectral gap around the tracked band fell below the working floor."""


class SingularReducedOperator(AdiabandError):
    """Resolvent requested at a point too close to the complementary spectrum."""


class ContourTooClose(AdiabandError):
    """An integration contour passes too close to an eigenvalue."""


class EndpointViolation(AdiabandError):
    """A coupling or schedule value violates a required endpoint condition."""


class NormalizationFailure(AdiabandError):
    """A schedule failed to reach its required terminal value."""


class NonPositiveGap(AdiabandError):
    """A gap function must be strictly positive but is not."""


class StepLimitExceeded(AdiabandError):
    """Propagator refinement hit the step cap before self convergence."""


class GridMismatch(AdiabandError):
    """Two traces must share the same time grid and tau but do not."""


class QuadratureNotConverged(AdiabandError):
    """A quadrature result changed too much under node doubling."""


class ConfigError(AdiabandError):
    """A run configuration is malformed (unknown key, bad value, missing field)."""


class InsufficientPoints(AdiabandError):
    """Not enough data points for the requested fit."""


class NonPositiveValue(AdiabandError):
    """A quantity that enters a log-log fit must be positive but is not."""

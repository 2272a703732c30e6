"""Exception hierarchy.

The CLI maps each family to an exit code: ``ConfigError`` -> 1,
``PreconditionError`` -> 2, ``NumericalError`` -> 3.
"""


class DualGrassError(Exception):
    """Base class for all library errors."""


class DimensionError(DualGrassError, ValueError):
    """Operand shapes are incompatible."""


class ConfigError(DualGrassError, ValueError):
    """Malformed or inconsistent experiment configuration."""


class PreconditionError(DualGrassError, ValueError):
    """An input violates the hypotheses an operation is stated under."""


class NotInCone(PreconditionError):
    """X*X is not a positive multiple of the identity."""


class PlaneDegenerate(PreconditionError):
    """span_R{X^, Y^} is not two-dimensional."""


class StarViolated(PreconditionError):
    """X*Y is not a scalar multiple of the identity."""


class NotTotallyGeodesicChart(PreconditionError):
    """The generating plane does not close under the triple bracket."""


class NonClosedCurve(PreconditionError):
    """Curve endpoint differs from its start point."""


class NonSimpleCurve(PreconditionError):
    """Polygon edges intersect, or the region is not star-shaped about its centroid."""


class NumericalError(DualGrassError, RuntimeError):
    """A numerical procedure failed to reach its target accuracy."""


class QuadratureNotConverged(NumericalError):
    pass


class BlockLeakage(NumericalError):
    """Holonomy left U(n) x U(m) by more than the allowed residual."""

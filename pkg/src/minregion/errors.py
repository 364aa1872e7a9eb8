"""Exception types shared across the package."""


class CoincidentPointsError(ValueError):
    """Two points that must be distinct coincide."""


class ZeroVectorError(ValueError):
    """A direction vector is zero where a nonzero one is required."""


class ArcCosineDomainError(ValueError):
    """An arccos argument exceeded 1 in magnitude by more than roundoff allows."""


class InsideBallError(ValueError):
    """A query point lies inside the closed ball where it must be outside."""


class NotOnBoundaryError(ValueError):
    """A point expected on the sphere is too far from it."""


class NegativeDiscriminantError(ValueError):
    """A squared length came out negative beyond roundoff."""


class DimensionMismatchError(ValueError):
    """Operands carry different space dimensions."""


class KinkPointError(ValueError):
    """A single gradient was requested where only a subdifferential exists."""


class GridMismatchError(ValueError):
    """Two masks over different grids were combined."""


class ConfigError(ValueError):
    """A problem-definition file failed validation."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

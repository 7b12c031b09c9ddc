"""Exception hierarchy shared by all tflab modules."""


class TFLabError(Exception):
    """Base class for every error raised by tflab."""


class ConfigurationError(TFLabError, ValueError):
    """Invalid grid, lattice, exponent or experiment configuration."""


class UnsupportedDimensionError(ConfigurationError):
    pass


class ResolutionError(ConfigurationError):
    """The grid does not resolve the requested object."""


class DomainError(TFLabError, ValueError):
    """A field or construction does not fit inside the computational domain."""

    def __init__(self, message, boundary_max=None):
        super().__init__(message)
        self.boundary_max = boundary_max


class UsageError(TFLabError, ValueError):
    """Operation applied to an argument of the wrong kind (side, flavor, grid)."""


class ShapeError(TFLabError, ValueError):
    pass


class ExponentError(ConfigurationError):
    pass


class ConstructionError(TFLabError, RuntimeError):
    """A certified construction failed its own verification."""


class BoundaryWarning(UserWarning):
    """Field has not decayed at the edge of the periodic domain."""

"""Exception hierarchy.  Every error carries a short machine-readable name."""


class SingsymError(Exception):
    """Base class for all errors raised by the package."""

    @property
    def code(self):
        return type(self).__name__


# geometry
class SpacingTooCoarse(SingsymError):
    pass


class AsymmetricGrid(SingsymError):
    pass


class EmptyCap(SingsymError):
    pass


class CapOutsideDomain(SingsymError):
    pass


class AxisNotClosed(SingsymError):
    pass


class NotADisk(SingsymError):
    pass


# nonlinearity
class NonPositiveArgument(SingsymError):
    pass


class NegativeArgument(SingsymError):
    pass


class InvalidNonlinearity(SingsymError):
    pass


# solver
class DegenerateCutCell(SingsymError):
    pass


class NoConvergence(SingsymError):
    pass


class NewtonStalled(SingsymError):
    pass


class GridMismatch(SingsymError):
    pass


class NonPositiveField(SingsymError):
    pass


class SingularSubmatrix(SingsymError):
    pass


# verification
class EmptyTrimmedCap(SingsymError):
    pass


class HypothesisUnmet(SingsymError):
    pass


class NonPositiveX(SingsymError):
    pass


# cli
class MissingField(SingsymError):
    pass


class ConfigError(SingsymError):
    pass

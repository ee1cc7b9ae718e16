"""Exception hierarchy shared by all pmlab modules."""


class PMLabError(Exception):
    """Base class for all pmlab errors."""


class DomainError(PMLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(PMLabError, ValueError):
    """Value outside the range covered by a grid, table, or trajectory."""


class HypothesisError(PMLabError):
    """A structural hypothesis on the nonlinearity fails (e.g. third derivative
    at the critical slope is not negative), so a derived quantity is undefined."""


class ConfigError(PMLabError, ValueError):
    """Invalid experiment configuration; message carries the field path."""


class NumericError(PMLabError, ArithmeticError):
    """Non-finite values or a failed root search inside a numerical kernel."""


class SelectionError(PMLabError):
    """Automatic parameter selection for a barrier did not converge."""


class ConeError(PMLabError, ValueError):
    """Requested drift speed is incompatible with the expansion cone."""


class TrackingError(PMLabError):
    """Front tracking could not be initialised (no interface at t=0)."""


class DegeneracyError(PMLabError):
    """Gradient magnitude below the floor where the 2D flux is ill-defined."""

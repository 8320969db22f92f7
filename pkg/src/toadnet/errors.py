"""Exception hierarchy shared by the fabric, crosstalk and CILS modules."""


class ToadnetError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(ToadnetError, ValueError):
    pass


class MeasurementInconsistentError(ToadnetError):
    """Measured output power is below the launch power (loss, not crosstalk)."""


class NonIdentifiableUnitError(ToadnetError):
    """The per-stage crosstalk unit is too small to count against the tolerance."""


class AmbiguousMeasurementError(ToadnetError):
    """Measured crosstalk is not an integer number of stage units."""

    def __init__(self, message, count, residual):
        super().__init__(message)
        self.count = count
        self.residual = residual


class NothingToLocalizeError(ToadnetError):
    pass


class InfeasibleCountError(ToadnetError):
    """More contaminated stages were counted than the lightpath has."""


class ScenarioError(ToadnetError, ValueError):
    """A scenario document failed validation."""

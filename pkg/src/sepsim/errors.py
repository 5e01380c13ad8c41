"""Exception types shared across the simulator."""


class SepsimError(Exception):
    """Base class for all simulator errors."""


class NonFiniteField(SepsimError):
    """An applied field sample was NaN or infinite."""


class DemagnetizationFailed(SepsimError):
    """Residual magnetization stayed above threshold after the configured cycles."""


class CoincidentDipoles(SepsimError):
    """Two dipoles closer than the minimum gap; the point model is invalid there."""


class InsufficientVoltage(SepsimError):
    """Bank voltage below the gate-functional minimum; pulse refused."""


class StallError(SepsimError):
    """Peak available motor force does not exceed the friction demand."""


class NoMotorContact(SepsimError):
    """The module has no neighbor forming a linear motor on the motion axis."""


class CollisionError(SepsimError):
    """A motion would overlap two module footprints."""


class ConnectionTooWeak(SepsimError):
    """Stored holding force below the demand of a carry/pull operation."""


class CalibrationMissing(SepsimError):
    """An operation needing fitted constants ran without a calibration."""


class FitDiverged(SepsimError):
    """A calibration fit failed to converge; diagnostics in the message."""


class ScenarioError(SepsimError):
    """A scenario or schedule file failed validation."""

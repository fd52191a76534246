"""Error taxonomy shared across the gateway."""


class HearthError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(HearthError):
    """An argument violated an operation's precondition."""


class SensorOpenCircuit(HearthError):
    """ADC code 0 on a divider channel: the output sits at ground."""


class CalibrationError(HearthError):
    """Calibration could not be computed from the given samples."""


class NotCalibrated(HearthError):
    """A reference resistance is missing or non-positive."""


class UnknownDevice(HearthError):
    """A device id does not exist in the home's registry."""


class SchemaError(HearthError):
    """A document (scenario, config) does not match its schema."""


class UnsupportedActuator(HearthError):
    """Command sent to a device that cannot act on it."""


class NotFound(HearthError):
    """Lookup by id failed."""


class InvalidDestination(HearthError):
    """SMS destination is not a valid E.164 number."""


class StorageError(HearthError):
    """Persistence failed; callers must not drop data silently."""


class ReplayError(HearthError):
    """A ledger file contains a line that cannot be parsed."""

    def __init__(self, message: str, line_no: int):
        super().__init__(message)
        self.line_no = line_no

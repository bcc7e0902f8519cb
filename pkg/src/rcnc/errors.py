"""Exception types shared across the package."""


class RCNCError(Exception):
    """Base class for all package errors."""


class InvalidInputError(RCNCError, ValueError):
    pass


class ProtocolError(RCNCError):
    """A packet does not belong to the decoder it was handed to."""


class NotReadyError(RCNCError):
    """Decoding was requested before the decoder reached full rank."""


class ConfigError(RCNCError, ValueError):
    pass


class SimulationCapError(RCNCError):
    """A simulation exceeded its hard event cap without terminating."""


class OutputError(RCNCError, OSError):
    """A result file could not be written or read."""

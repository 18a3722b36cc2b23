"""Exception types shared across the simulator."""


class TnnError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(TnnError, ValueError):
    """Inconsistent dimensions or parameter values (e.g. weight/volley length mismatch)."""


class ProtocolError(TnnError):
    """A hardware protocol rule was violated (e.g. inc and dec asserted together,
    or a weight update issued while a readout is in flight)."""


class IngestionError(TnnError):
    """A dataset file is malformed or inconsistent with its companion file."""

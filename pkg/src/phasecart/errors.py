"""Exception types shared across the package."""


class PhasecartError(Exception):
    """Base class for all package errors."""


class ConfigError(PhasecartError, ValueError):
    """Invalid configuration, path or argument."""


class SingularPathError(PhasecartError):
    """A path or evolution touches a zero of the overlap, where phase is undefined."""


class ConsistencyError(PhasecartError):
    """An internal cross-check failed (e.g. non-integer winding)."""

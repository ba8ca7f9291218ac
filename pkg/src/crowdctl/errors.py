"""Exception types raised across the package."""


class CrowdCtlError(Exception):
    """Base class for all package errors."""


class DomainError(CrowdCtlError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class CapacityError(CrowdCtlError):
    """Problem size exceeds the configured cap of a dense solver."""


class StiffnessError(CrowdCtlError):
    """The adaptive integrator's step size underflowed."""


class PositivityError(CrowdCtlError):
    """A finite-volume update produced negative density."""


class UnsupportedInputError(CrowdCtlError, ValueError):
    """Input measures cannot be handled by any available transport solver."""


class ConfigError(CrowdCtlError, ValueError):
    """Malformed or out-of-range experiment configuration.

    Attributes
    ----------
    key : str or None
        Offending configuration key, when known.
    line : int or None
        1-based line number in the configuration text, when known.
    """

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line

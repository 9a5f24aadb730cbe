"""Exception hierarchy shared across the library."""


class ModleakError(Exception):
    """Base class for all library errors."""


class InvalidArgument(ModleakError, ValueError):
    """A parameter is outside its admissible range."""


class UnphysicalState(ModleakError, ValueError):
    """A covariance matrix violates the uncertainty relation."""


class MissingMode(ModleakError, KeyError):
    """A requested mode label is not present in the state."""


class NumericalError(ModleakError, ArithmeticError):
    """A linear-algebra routine failed or lost too much precision."""


class DegenerateConfig(ModleakError, ValueError):
    """A modulator configuration has no desired sideband to normalize against."""

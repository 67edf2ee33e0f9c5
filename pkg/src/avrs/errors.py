"""Exception hierarchy shared across the package."""


class AvrsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(AvrsError):
    """Invalid model data: mismatched alphabets, broken simplex constraints,
    malformed input files."""


class UsageError(AvrsError):
    """An operation was called with arguments outside its contract
    (bad indices, mismatched lengths, out-of-range parameters)."""


class NumericError(AvrsError):
    """A computation produced non-finite or otherwise unusable numbers."""


class InfeasibleDistortionError(AvrsError):
    """No policy on the search grid meets the distortion constraint at the
    requested level."""


class EnumerationTooLargeError(AvrsError):
    """An exact enumeration was refused because its size would be impractical."""

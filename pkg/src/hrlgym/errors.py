"""Exception types shared across the package."""


class HrlGymError(Exception):
    """Base class for all package errors."""


class ParseError(HrlGymError):
    """Action text or registry file could not be parsed."""


class RangeError(HrlGymError):
    """An index fell outside its declared range."""


class SchemaError(HrlGymError):
    """A task-suite file violates the suite schema."""


class ConfigError(HrlGymError):
    """Invalid or unknown configuration value."""


class ShapeError(HrlGymError):
    """Array dimensions do not match what the operation expects."""


class StepAfterDone(HrlGymError):
    """step() was called on a finished episode."""


class CalledBeforeDone(HrlGymError):
    """An end-of-episode query was made before the episode finished."""


class NonPositiveOracle(HrlGymError):
    """Reward normalization needs a strictly positive oracle total."""


class DegenerateSuite(HrlGymError):
    """The task suite cannot support the requested sampling mode."""


class IncompleteTrace(HrlGymError):
    """Episode scoring was asked for before the episode finished."""


class EmptyInput(HrlGymError):
    """An aggregate operation received no records."""

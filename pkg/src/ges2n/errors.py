"""Exception types raised across the package."""


class Ges2nError(ValueError):
    """Base class for invalid inputs and numerical failures."""


class DegenerateObjectiveError(Ges2nError):
    """The noise term of the objective is zero, negative or non-finite."""


class StaleCacheError(Ges2nError):
    """A cached spectrum was computed for different filter coefficients."""


class SingularAutocorrelationError(Ges2nError):
    """Levinson-Durbin hit a non-positive prediction error variance."""


class SchemaError(Ges2nError):
    """An input file does not follow the expected layout."""


class ConfigError(Ges2nError):
    """A run or synthesis configuration is invalid."""

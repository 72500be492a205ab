"""Exception types raised across the modem simulator."""


class InvalidInputError(ValueError):
    """Input data violates an operation's precondition."""


class ConfigurationError(ValueError):
    """A configuration object is internally inconsistent."""


class MethodMismatchError(RuntimeError):
    """A threshold update was applied to a controller of another method."""

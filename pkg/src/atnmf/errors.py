"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class InvalidConfigError(ValueError):
    """A solver or experiment parameter is outside its allowed range."""


class InvalidInputError(ValueError):
    """Input data violates a precondition (e.g. an all-zero mask)."""


class ParseError(ValueError):
    """A data file could not be parsed; message carries line/column context."""

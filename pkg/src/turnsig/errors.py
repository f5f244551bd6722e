"""Exception hierarchy shared by all turnsig modules."""


class TurnsigError(Exception):
    """Base class for every error raised by turnsig."""


class InvalidInputError(TurnsigError, ValueError):
    """Non-finite values or arguments outside their domain."""


class ShapeError(TurnsigError, ValueError):
    """Dimension, level or length mismatch between operands."""


class ParseError(TurnsigError, ValueError):
    """A file failed validation. ``path`` locates the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class LexiconError(ParseError):
    pass


class ConfigError(TurnsigError, ValueError):
    """Invalid experiment or generator configuration."""


class DataError(TurnsigError, ValueError):
    """A dataset cannot support the requested operation."""

"""Exception hierarchy shared by all texsom modules."""


class TexsomError(Exception):
    """Base class for every error raised deliberately by texsom."""


class InvalidParameterError(TexsomError, ValueError):
    """A numeric or structural argument is outside its allowed range."""


class EmptyWindowError(TexsomError, ValueError):
    """A co-occurrence offset leaves no valid pixel pair in the window."""


class InvalidPartitionError(TexsomError, ValueError):
    """The image cannot be tiled into the requested sub-images and blocs."""


class StratificationError(TexsomError, ValueError):
    """A class has too few members for the requested number of folds."""


class UntrainedModelError(TexsomError, RuntimeError):
    """Prediction was requested from a map with no claimed nodes."""


class ParseError(TexsomError, ValueError):
    """Malformed input file.

    ``offset`` is a byte offset for binary formats and a 1-based row number
    for tabular ones; either may be ``None`` when no position applies.
    """

    def __init__(self, message, offset=None, path=None):
        self.offset = offset
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"at {offset}")
        prefix = (" ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)


class ConfigError(TexsomError, ValueError):
    """Invalid run configuration (bad key, bad value, missing path)."""

"""Exception hierarchy shared by the library and the command line."""


class CostarrError(Exception):
    """Base class for all library errors."""


class FormatError(CostarrError, ValueError):
    """A file does not follow the CST1 or CSV layout."""


class TruncatedFileError(CostarrError, OSError):
    """A CST1 payload ended before the declared element count."""


class ShapeError(CostarrError, ValueError):
    """Arrays that must agree in shape do not."""


class FitError(CostarrError, ValueError):
    """The training split cannot produce a valid model."""


class DegenerateError(CostarrError, ValueError):
    """A statistical test has no evidence to work with (all differences zero)."""

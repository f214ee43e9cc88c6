"""Exception types raised by the toolkit."""


class BuildSegError(Exception):
    """Base class for input parse/validation failures."""


class UnsupportedBitDepthError(BuildSegError):
    pass


class CorruptImageError(BuildSegError):
    pass


class GridParseError(BuildSegError):
    """Malformed ESRI ASCII grid (header, value count or token)."""


class DimensionMismatchError(BuildSegError, ValueError):
    pass


class OutOfBoundsError(BuildSegError, ValueError):
    pass

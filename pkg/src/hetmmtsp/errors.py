"""Exception types raised across the package."""


class HetMMError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HetMMError, ValueError):
    """Malformed data: non-finite coordinates, unknown ids, overlapping required sets."""


class InvalidMoveError(HetMMError, ValueError):
    """A tour edit that does not make sense for the tour it is applied to."""


class CapacityError(HetMMError, ValueError):
    """An exact method was asked to solve a problem above its hard size cap."""


class GenerationError(HetMMError, ValueError):
    """Instance generation could not satisfy a heterogeneity rule."""


class ParseError(InvalidInputError):
    """Instance document could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

"""Exception hierarchy shared by every module."""


class GeometryError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInput(GeometryError):
    pass


class DuplicatePoint(GeometryError):
    def __init__(self, i, j):
        super().__init__(f"points {i} and {j} coincide")
        self.pair = (i, j)


class TooLarge(GeometryError):
    pass


class TooFewPoints(GeometryError):
    pass


class BadK(GeometryError):
    pass


class EdgeNotFound(GeometryError):
    pass


class UnlabeledVertex(GeometryError):
    pass


class SingularTransform(GeometryError):
    pass


class BadParameters(GeometryError):
    pass


class UnknownScenario(GeometryError):
    pass


class BadGrid(GeometryError):
    pass


class InsufficientData(GeometryError):
    pass


class NonPositiveValue(GeometryError):
    pass


class ParseError(GeometryError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PrecisionError(ParseError):
    pass

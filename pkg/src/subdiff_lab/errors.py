"""Exception hierarchy for subdiff_lab."""


class SubdiffLabError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SubdiffLabError):
    pass


class DomainError(SubdiffLabError):
    """A point lies outside ``dom f`` (or a region misses it entirely)."""


class EmptyDomainOnSegment(DomainError):
    pass


class BoundaryPoint(DomainError):
    """Subdifferentials are only produced at interior points of ``dom f``."""


class PreconditionSci(SubdiffLabError):
    """``f(xbar) <= inf f(xbar + lambda B) + eps`` does not hold."""


class PreconditionLambda(SubdiffLabError):
    """``lambda > f(xbar) - f(x)`` in the mean value construction."""


class IsActuallyOptimal(SubdiffLabError):
    pass


class ConvexityRequired(SubdiffLabError):
    pass


class EmptyEnlargement(SubdiffLabError):
    pass


class WitnessNotFound(SubdiffLabError):
    pass


class ParseError(SubdiffLabError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class NonlinearityError(ParseError):
    pass


class NegativeScaleError(ParseError):
    pass


class PieceCapExceeded(SubdiffLabError):
    pass

"""Exception and warning types raised across the package."""


class PCDError(ValueError):
    """Base class for invalid-input and numerical failures."""


class DegenerateTriangle(PCDError):
    pass


class SingularMap(PCDError):
    pass


class TooFewPoints(PCDError):
    pass


class AllCollinear(PCDError):
    pass


class DuplicatePoints(PCDError):
    pass


class OutsideTriangle(PCDError):
    pass


class OutsideSubregion(PCDError):
    pass


class TauBoundary(PCDError):
    pass


class TauOutOfRange(PCDError):
    pass


class InvalidEpsilon(PCDError):
    pass


class NoInteriorPoints(PCDError):
    pass


class TooFewVertices(PCDError):
    pass


class InvalidIndex(PCDError, IndexError):
    pass


class SelfPair(PCDError):
    pass


class BadWeights(PCDError):
    pass


class DegenerateVariance(PCDError):
    pass


class QuadratureNotConverged(PCDError):
    pass


class NumericalInstability(PCDError):
    pass


class TooFewSamples(PCDError):
    pass


class OverlapWarning(UserWarning):
    """Corner regions of an alternative pattern overlap or touch."""


class DegenerateAlternativeWarning(UserWarning):
    """The alternative's asymptotic variance is zero for this (tau, eps)."""

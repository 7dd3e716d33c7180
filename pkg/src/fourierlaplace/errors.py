"""Exception hierarchy.

Every error raised by the package derives from :class:`FLError`; the CLI maps
the three families below to distinct exit codes.
"""


class FLError(Exception):
    """Base class for all package errors."""


class ParseError(FLError):
    pass


class UnsupportedGermShape(FLError):
    def __init__(self, msg, polygon=None):
        super().__init__(msg)
        self.polygon = polygon


class ConsistencyFailure(FLError):
    pass


# scalar layer
class DivisionByZero(FLError, ZeroDivisionError):
    pass


class EvaluationPoleExhausted(FLError):
    pass


# series layer
class CoordinateMismatch(FLError):
    pass


class ZeroLeadingCoefficient(FLError):
    pass


class LogarithmicTerm(FLError):
    pass


class NotReversible(FLError):
    pass


# operator layer
class ChartMismatch(FLError):
    pass


class NotFormallyInvertible(FLError):
    pass


class Inconclusive(FLError):
    pass


class OracleDisagreement(ConsistencyFailure):
    pass


# germ / transform layer
class DegeneratePolygon(UnsupportedGermShape):
    pass


class NonIntegralSwan(ConsistencyFailure):
    pass


class NonSemisimpleResidue(UnsupportedGermShape):
    pass


class SlopeOutOfDomain(FLError):
    pass


class InconsistentRelations(ConsistencyFailure):
    pass


class SeedMismatch(ConsistencyFailure):
    pass


class ConstraintViolation(FLError):
    pass

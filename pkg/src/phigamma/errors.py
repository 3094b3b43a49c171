"""Exception hierarchy.

Every error raised by the library derives from :class:`PhiGammaError`, so
callers (the CLI in particular) can separate mathematical/validation failures
from programming errors.
"""


class PhiGammaError(Exception):
    """Base class for all library errors."""


# -- parameters -------------------------------------------------------------

class InvalidParams(PhiGammaError, ValueError):
    pass


class NonPrime(InvalidParams):
    pass


class BadUnit(InvalidParams):
    pass


class CongruenceViolation(InvalidParams):
    pass


class BadLevel(InvalidParams):
    pass


# -- ring arithmetic --------------------------------------------------------

class LevelMismatch(PhiGammaError, ValueError):
    pass


class IncompatibleLevels(PhiGammaError, ValueError):
    pass


class IndexOutOfRange(PhiGammaError, IndexError):
    pass


class NotAUnit(PhiGammaError, ArithmeticError):
    pass


class RelationFailure(PhiGammaError, AssertionError):
    pass


# -- homological algebra ----------------------------------------------------

class IllDefinedMorphism(PhiGammaError, ValueError):
    pass


class NotAComplex(PhiGammaError, ValueError):
    pass


class NotAChainMap(PhiGammaError, ValueError):
    pass


class OperatorsDoNotCommute(PhiGammaError, ValueError):
    pass


class StrandNotExact(PhiGammaError, AssertionError):
    pass


# -- complexes built from modules ------------------------------------------

class CompositeNonzero(PhiGammaError, AssertionError):
    pass


class FixtureMismatch(PhiGammaError, AssertionError):
    pass


class BetaNotTrivial(PhiGammaError, ValueError):
    pass


# -- modules ----------------------------------------------------------------

class InvalidModule(PhiGammaError, ValueError):
    pass


ValidationError = InvalidModule


class NotInvertible(InvalidModule):
    pass


class WrongOrder(InvalidModule):
    pass


class SemidirectRelationFails(InvalidModule):
    pass


class PhiDoesNotCommute(InvalidModule):
    pass


class PhiMissing(PhiGammaError, ValueError):
    pass


class FamilyConstraintViolated(PhiGammaError, ValueError):
    pass


class ParseError(PhiGammaError, ValueError):
    def __init__(self, position: str, message: str):
        super().__init__(f"{position}: {message}")
        self.position = position
        self.message = message

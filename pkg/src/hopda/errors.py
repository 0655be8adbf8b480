"""Exception hierarchy shared by every module."""


class HopdaError(Exception):
    """Base class for all library errors."""


class EmptyAlongSpine(HopdaError):
    """A stack on the path to the requested level is empty."""


class OrderMismatch(HopdaError):
    pass


class AlphabetMismatch(HopdaError):
    pass


class RankViolation(HopdaError):
    pass


class UnknownSymbol(HopdaError):
    pass


class ParseError(HopdaError):
    def __init__(self, msg, line=None, col=None):
        self.line, self.col = line, col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + msg)


class BudgetExceeded(HopdaError):
    """Raised when an explicit resource cap is hit.

    `partial` carries whatever was computed so far, when that makes sense.
    """

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class SaturationBudgetExceeded(BudgetExceeded):
    pass


class AnnotationBudgetExceeded(BudgetExceeded):
    pass


class MissingCanpopKey(HopdaError):
    pass


class UnmatchedPush(HopdaError):
    pass

"""Exception hierarchy shared by every module of the package."""


class EndorbitError(Exception):
    pass


class PrecisionExhausted(EndorbitError, ArithmeticError):
    """A result depends on digits beyond the certified precision."""


class ZeroValuation(EndorbitError, ArithmeticError):
    """Valuation or leading coefficient requested for an exact zero."""


class DivisionByZero(EndorbitError, ZeroDivisionError):
    pass


class NotASquare(EndorbitError, ValueError):
    pass


class LevelError(EndorbitError, ValueError):
    """Operands live at levels that cannot be combined or demoted."""


class InvalidNu(EndorbitError, ValueError):
    pass


class NotRegular(EndorbitError, ValueError):
    pass


class NegativeInvariant(EndorbitError, ValueError):
    """Some M_ij or N_ij is negative; every orbital integral vanishes."""


class MissingSymbol(EndorbitError, KeyError):
    pass


class CorollaryMismatch(EndorbitError, AssertionError):
    pass


class NotApplicable(EndorbitError, ValueError):
    pass


class Unstable(EndorbitError, RuntimeError):
    """An oracle value changed when its truncation caps were enlarged."""


class TargetUnreachable(EndorbitError, RuntimeError):
    pass

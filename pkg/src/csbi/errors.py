"""Exception hierarchy shared by the csbi modules."""


class CsbiError(Exception):
    """Base class for every error raised by this package."""


class ConjugationViolation(CsbiError, ValueError):
    """A root list that should describe a real polynomial is not closed
    under complex conjugation."""


class NonConvergence(CsbiError, ArithmeticError):
    """The polynomial root finder failed to reach its residual target."""


class ParseError(CsbiError, ValueError):
    """Malformed transfer-function text.

    ``position`` is the 0-based character offset where the problem was
    detected, or ``None`` for structural problems that have no location.
    """

    def __init__(self, message, position=None, text=None):
        self.message = message
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class MixedVariables(ParseError):
    pass


class OriginZero(CsbiError, ValueError):
    """A zero at the origin: z = 0 (discrete) or s = 0 (continuous)."""


class ImproperTF(CsbiError, ValueError):
    """More zeros than poles."""


class NonCausalClosedLoop(CsbiError, ValueError):
    """Biproper discrete loop with K = -1: the closed loop loses a pole."""


class ZeroAtOrigin(CsbiError, ValueError):
    """T(0) = 0, so the low-frequency cross-check is not defined."""


class RelativeDegreeZero(CsbiError, ValueError):
    pass

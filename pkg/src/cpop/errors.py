"""Exception types raised across the package."""


class CpopError(ValueError):
    """Base class for every validation error raised by this package."""


class InvalidName(CpopError):
    pass


class NonRealObjective(CpopError):
    pass


class DuplicateName(CpopError):
    pass


class InvertedBounds(CpopError):
    pass


class UnknownVariable(CpopError):
    pass


class NameCollision(CpopError):
    pass


class InvalidBounds(CpopError):
    pass


class MissingVoltage(CpopError):
    pass


class ZeroImpedance(CpopError):
    pass


class UnknownTarget(CpopError):
    pass


class MissingParticipation(CpopError):
    pass


class ParseError(CpopError):
    """Malformed input text; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DanglingReference(ParseError):
    pass


class UnsupportedCostModel(ParseError):
    pass


class SchemaError(CpopError):
    pass


class UnknownElement(SchemaError):
    pass


class UndeclaredVariable(ParseError):
    pass


class DuplicateBound(ParseError):
    pass


class OrderTooSmall(CpopError):
    pass


class NoFeasibleGridPoint(CpopError):
    pass


class BackendFailure(RuntimeError):
    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


class PenaltyCapExceeded(RuntimeError):
    pass


class AmbiguousRoundingWarning(UserWarning):
    pass

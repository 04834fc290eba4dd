class HarmsecError(Exception):
    """Base class for all errors raised by this package."""


class SingularMetric(HarmsecError):
    pass


class DomainViolation(HarmsecError):
    pass


class AxiomViolation(HarmsecError):
    def __init__(self, axiom: str, point, residual: float):
        self.axiom = axiom
        self.point = tuple(float(c) for c in point)
        self.residual = float(residual)
        super().__init__(f"axiom {axiom!r} violated at {self.point}: residual {self.residual:.3e}")


class NotInD(HarmsecError):
    pass


class NotContactMetric(HarmsecError):
    pass


class NotApplicable(HarmsecError):
    pass


class NotSubmersive(HarmsecError):
    pass


class NonPositiveWarp(HarmsecError):
    pass


class UnknownEntry(HarmsecError):
    pass


class ParamOutOfRange(HarmsecError):
    pass


class EpsilonOutOfRange(HarmsecError):
    pass


class ConfigError(HarmsecError):
    pass


class ReportIOError(HarmsecError):
    pass


class ParseError(HarmsecError):
    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{exp}")


class EvalError(HarmsecError):
    pass


class UnboundVariable(EvalError):
    pass
